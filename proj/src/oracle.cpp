#include "xbarnn/oracle.hpp"

#include "xbarnn/errors.hpp"

#include <cmath>
#include <ostream>
#include <sstream>
#include <string>

namespace xbarnn {

namespace {

CircuitRegime classify(const NonIdealityConfig& cfg) {
    const bool rs = cfg.source_resistance() > 0.0;
    const bool rneu = cfg.neuron_resistance() > 0.0;
    if (rs && rneu) return CircuitRegime::Full;
    if (!rs && rneu) return CircuitRegime::SourceIdeal;
    if (rs && !rneu) return CircuitRegime::NeuronIdeal;
    return CircuitRegime::Ideal;
}

// Active-node bookkeeping. A row node exists only when its array has at
// least one conducting device in that row (an isolated row floats behind
// its source and carries no output current); a neuron node exists only
// when some device feeds its column. A device whose conductance is zero
// stamps nothing.
struct NodeMaps {
    std::vector<Eigen::Index> pos_row, neg_row, col;
    Eigen::Index count = 0;
};

NodeMaps build_maps(const SplitConductance& s, CircuitRegime regime) {
    const Eigen::Index m = s.rows(), n = s.cols();
    NodeMaps maps;
    maps.pos_row.assign(static_cast<size_t>(m), -1);
    maps.neg_row.assign(static_cast<size_t>(m), -1);
    maps.col.assign(static_cast<size_t>(n), -1);

    const bool want_rows =
        regime == CircuitRegime::Full || regime == CircuitRegime::NeuronIdeal;
    const bool want_cols =
        regime == CircuitRegime::Full || regime == CircuitRegime::SourceIdeal;

    if (want_rows) {
        for (Eigen::Index i = 0; i < m; ++i)
            if ((s.g_pos.row(i).array() > 0.0).any()) maps.pos_row[i] = maps.count++;
        for (Eigen::Index i = 0; i < m; ++i)
            if ((s.g_neg.row(i).array() > 0.0).any()) maps.neg_row[i] = maps.count++;
    }
    if (want_cols) {
        for (Eigen::Index j = 0; j < n; ++j)
            if ((s.g_pos.col(j).array() > 0.0).any() ||
                (s.g_neg.col(j).array() > 0.0).any())
                maps.col[j] = maps.count++;
    }
    return maps;
}

void stamp_branch(Eigen::MatrixXd& g, Eigen::Index a, Eigen::Index b, double cond) {
    g(a, a) += cond;
    g(b, b) += cond;
    g(a, b) -= cond;
    g(b, a) -= cond;
}

Eigen::MatrixXd assemble_matrix(const SplitConductance& s, const NonIdealityConfig& cfg,
                                CircuitRegime regime, const NodeMaps& maps) {
    const Eigen::Index m = s.rows(), n = s.cols();
    const double r_s = cfg.source_resistance();
    const double r_neu = cfg.neuron_resistance();
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(maps.count, maps.count);

    switch (regime) {
        case CircuitRegime::Full:
            for (Eigen::Index i = 0; i < m; ++i) {
                if (maps.pos_row[i] >= 0) g(maps.pos_row[i], maps.pos_row[i]) += 1.0 / r_s;
                if (maps.neg_row[i] >= 0) g(maps.neg_row[i], maps.neg_row[i]) += 1.0 / r_s;
            }
            for (Eigen::Index j = 0; j < n; ++j) {
                if (maps.col[j] < 0) continue;
                for (Eigen::Index i = 0; i < m; ++i) {
                    if (s.g_pos(i, j) > 0.0)
                        stamp_branch(g, maps.pos_row[i], maps.col[j], s.g_pos(i, j));
                    if (s.g_neg(i, j) > 0.0)
                        stamp_branch(g, maps.neg_row[i], maps.col[j], s.g_neg(i, j));
                }
                g(maps.col[j], maps.col[j]) += 1.0 / r_neu;
            }
            break;
        case CircuitRegime::SourceIdeal:
            // Row voltages are fixed at the sources; neuron nodes do not
            // interconnect.
            for (Eigen::Index j = 0; j < n; ++j)
                if (maps.col[j] >= 0)
                    g(maps.col[j], maps.col[j]) =
                        s.g_pos.col(j).sum() + s.g_neg.col(j).sum() + 1.0 / r_neu;
            break;
        case CircuitRegime::NeuronIdeal:
            // Neuron nodes are ground; row nodes do not interconnect.
            for (Eigen::Index i = 0; i < m; ++i) {
                if (maps.pos_row[i] >= 0)
                    g(maps.pos_row[i], maps.pos_row[i]) = 1.0 / r_s + s.g_pos.row(i).sum();
                if (maps.neg_row[i] >= 0)
                    g(maps.neg_row[i], maps.neg_row[i]) = 1.0 / r_s + s.g_neg.row(i).sum();
            }
            break;
        case CircuitRegime::Ideal:
            break;
    }
    return g;
}

Eigen::VectorXd assemble_injection(const SplitConductance& s, const NonIdealityConfig& cfg,
                                   CircuitRegime regime, const NodeMaps& maps,
                                   const Eigen::VectorXd& a) {
    const Eigen::Index m = s.rows(), n = s.cols();
    const double r_s = cfg.source_resistance();
    Eigen::VectorXd inj = Eigen::VectorXd::Zero(maps.count);

    switch (regime) {
        case CircuitRegime::Full:
        case CircuitRegime::NeuronIdeal:
            // Norton equivalents of the sources behind R_s.
            for (Eigen::Index i = 0; i < m; ++i) {
                if (maps.pos_row[i] >= 0) inj(maps.pos_row[i]) = a(i) / r_s;
                if (maps.neg_row[i] >= 0) inj(maps.neg_row[i]) = -a(i) / r_s;
            }
            break;
        case CircuitRegime::SourceIdeal: {
            // Device currents driven by the fixed row voltages +-a.
            const Eigen::VectorXd drive = s.g_pos.transpose() * a - s.g_neg.transpose() * a;
            for (Eigen::Index j = 0; j < n; ++j)
                if (maps.col[j] >= 0) inj(maps.col[j]) = drive(j);
            break;
        }
        case CircuitRegime::Ideal:
            break;
    }
    return inj;
}

Eigen::VectorXd extract_currents(const SplitConductance& s, const NonIdealityConfig& cfg,
                                 CircuitRegime regime, const NodeMaps& maps,
                                 const Eigen::VectorXd& a, const Eigen::VectorXd& v) {
    const Eigen::Index m = s.rows(), n = s.cols();
    switch (regime) {
        case CircuitRegime::Full:
        case CircuitRegime::SourceIdeal: {
            Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
            for (Eigen::Index j = 0; j < n; ++j)
                if (maps.col[j] >= 0) out(j) = v(maps.col[j]) / cfg.neuron_resistance();
            return out;
        }
        case CircuitRegime::NeuronIdeal: {
            // Branch currents into the grounded neuron nodes.
            Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
            for (Eigen::Index j = 0; j < n; ++j) {
                double current = 0.0;
                for (Eigen::Index i = 0; i < m; ++i) {
                    if (s.g_pos(i, j) > 0.0 && maps.pos_row[i] >= 0)
                        current += s.g_pos(i, j) * v(maps.pos_row[i]);
                    if (s.g_neg(i, j) > 0.0 && maps.neg_row[i] >= 0)
                        current += s.g_neg(i, j) * v(maps.neg_row[i]);
                }
                out(j) = current;
            }
            return out;
        }
        case CircuitRegime::Ideal:
            return (s.g_pos - s.g_neg).transpose() * a;
    }
    return {};
}

void check_residual(const Eigen::MatrixXd& g, const Eigen::VectorXd& v,
                    const Eigen::VectorXd& inj, const Eigen::LDLT<Eigen::MatrixXd>& ldlt) {
    if (inj.size() == 0) return;
    const double denom = std::max(inj.cwiseAbs().maxCoeff(), 1e-300);
    const double residual = (g * v - inj).cwiseAbs().maxCoeff() / denom;
    if (!(residual < 1e-10)) {
        const auto d = ldlt.vectorD().cwiseAbs();
        std::ostringstream msg;
        msg << "nodal solve residual " << residual << " exceeds 1e-10"
            << " (diagonal pivot ratio " << d.minCoeff() / d.maxCoeff() << ")";
        throw NumericError(msg.str());
    }
}

}  // namespace

ConductanceSystem build_system(const SplitConductance& s, const NonIdealityConfig& cfg,
                               const Eigen::VectorXd& a) {
    cfg.validate();
    if (a.size() != s.rows())
        throw ConfigError("build_system: input length does not match crossbar rows");

    ConductanceSystem sys;
    sys.regime = classify(cfg);
    const NodeMaps maps = build_maps(s, sys.regime);
    sys.node_count = maps.count;
    sys.g_matrix = assemble_matrix(s, cfg, sys.regime, maps);
    sys.i_vector = assemble_injection(s, cfg, sys.regime, maps, a);
    sys.column_node_index = maps.col;
    sys.devices = s;
    sys.cfg = cfg;
    sys.input = a;
    return sys;
}

Eigen::VectorXd solve_currents(const ConductanceSystem& sys) {
    const NodeMaps maps = build_maps(sys.devices, sys.regime);
    if (sys.regime == CircuitRegime::Ideal || maps.count == 0)
        return extract_currents(sys.devices, sys.cfg, sys.regime, maps, sys.input, {});

    Eigen::LDLT<Eigen::MatrixXd> ldlt(sys.g_matrix);
    if (ldlt.info() != Eigen::Success)
        throw NumericError("nodal solve: factorization failed (singular system)");
    const Eigen::VectorXd v = ldlt.solve(sys.i_vector);
    check_residual(sys.g_matrix, v, sys.i_vector, ldlt);
    return extract_currents(sys.devices, sys.cfg, sys.regime, maps, sys.input, v);
}

struct CrossbarOracle::Impl {
    NodeMaps maps;
};

CrossbarOracle::CrossbarOracle(SplitConductance s, NonIdealityConfig cfg)
    : s_(std::move(s)), cfg_(cfg), regime_(classify(cfg)), impl_(new Impl) {
    cfg_.validate();
    impl_->maps = build_maps(s_, regime_);
    node_count_ = impl_->maps.count;
    if (regime_ != CircuitRegime::Ideal && node_count_ > 0) {
        g_ = assemble_matrix(s_, cfg_, regime_, impl_->maps);
        ldlt_.compute(g_);
        if (ldlt_.info() != Eigen::Success)
            throw NumericError("nodal solve: factorization failed (singular system)");
    }
}

CrossbarOracle::~CrossbarOracle() = default;

Eigen::VectorXd CrossbarOracle::currents(const Eigen::VectorXd& a) const {
    if (a.size() != s_.rows())
        throw ConfigError("oracle: input length does not match crossbar rows");
    if (regime_ == CircuitRegime::Ideal || node_count_ == 0)
        return extract_currents(s_, cfg_, regime_, impl_->maps, a, {});
    const Eigen::VectorXd inj = assemble_injection(s_, cfg_, regime_, impl_->maps, a);
    const Eigen::VectorXd v = ldlt_.solve(inj);
    check_residual(g_, v, inj, ldlt_);
    return extract_currents(s_, cfg_, regime_, impl_->maps, a, v);
}

double nrmsd(const Eigen::VectorXd& model_out, const Eigen::VectorXd& oracle_out) {
    if (model_out.size() != oracle_out.size())
        throw ConfigError("nrmsd: vector lengths differ");
    if (model_out.size() == 0) throw ConfigError("nrmsd: empty vectors");
    const double range = oracle_out.maxCoeff() - oracle_out.minCoeff();
    if (range == 0.0) throw ConfigError("nrmsd: oracle output range is zero");
    const double ms =
        (model_out - oracle_out).squaredNorm() / static_cast<double>(oracle_out.size());
    return std::sqrt(ms) / range;
}

void write_netlist(std::ostream& os, const SplitConductance& s,
                   const NonIdealityConfig& cfg, const Eigen::VectorXd& a,
                   const TechnologyProfile& tech) {
    cfg.validate();
    tech.validate();
    if (cfg.source_resistance() <= 0.0 || cfg.neuron_resistance() <= 0.0)
        throw ConfigError("netlist export needs rs_ratio > 0 and rneu_ratio > 0 "
                          "(ideal branches have no resistor representation)");
    if (a.size() != s.rows())
        throw ConfigError("netlist export: input length does not match crossbar rows");

    const Eigen::Index m = s.rows(), n = s.cols();
    // Normalized resistance 1 corresponds to r_low ohms.
    const double unit = tech.r_low;
    const double rs_ohm = cfg.source_resistance() * unit;
    const double rneu_ohm = cfg.neuron_resistance() * unit;
    auto pos_node = [&](Eigen::Index i) { return 1 + i; };
    auto neg_node = [&](Eigen::Index i) { return 1 + m + i; };
    auto col_node = [&](Eigen::Index j) { return 1 + 2 * m + j; };

    os << "# crossbar netlist, " << m << "x" << n << ", technology " << tech.name << "\n";
    os << "# ground is node 0; sources are Norton equivalents\n";
    for (Eigen::Index i = 0; i < m; ++i) {
        os << "R " << pos_node(i) << " 0 " << rs_ohm << "\n";
        os << "R " << neg_node(i) << " 0 " << rs_ohm << "\n";
        os << "I " << pos_node(i) << " " << a(i) / rs_ohm << "\n";
        os << "I " << neg_node(i) << " " << -a(i) / rs_ohm << "\n";
    }
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < m; ++i) {
            if (s.g_pos(i, j) > 0.0)
                os << "R " << pos_node(i) << " " << col_node(j) << " "
                   << unit / s.g_pos(i, j) << "\n";
            if (s.g_neg(i, j) > 0.0)
                os << "R " << neg_node(i) << " " << col_node(j) << " "
                   << unit / s.g_neg(i, j) << "\n";
        }
        os << "R " << col_node(j) << " 0 " << rneu_ohm << "\n";
    }
}

}  // namespace xbarnn
