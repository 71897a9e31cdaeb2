#include "xbarnn/xbar.hpp"

#include "xbarnn/errors.hpp"

#include <string>

namespace xbarnn {

namespace {

// Series conductance of one device seen from its row: 1/(R + R_neu) with
// R = 1/g, rewritten as g/(1 + R_neu*g) so an open connection (g == 0)
// contributes exactly zero.
Eigen::ArrayXXd series_load(const Eigen::MatrixXd& g, double r_neu) {
    return g.array() / (1.0 + r_neu * g.array());
}

// Sums a set of equally sized vectors pairwise.
Eigen::VectorXd pairwise_sum(std::vector<Eigen::VectorXd> parts) {
    while (parts.size() > 1) {
        std::vector<Eigen::VectorXd> next;
        next.reserve((parts.size() + 1) / 2);
        for (size_t i = 0; i + 1 < parts.size(); i += 2)
            next.push_back(parts[i] + parts[i + 1]);
        if (parts.size() % 2 == 1) next.push_back(parts.back());
        parts = std::move(next);
    }
    return parts.front();
}

}  // namespace

DegradationFactors degradation_factors(const SplitConductance& s,
                                       const NonIdealityConfig& cfg) {
    const double r_s = cfg.source_resistance();
    const double r_neu = cfg.neuron_resistance();

    DegradationFactors f;
    const Eigen::VectorXd load_pos = series_load(s.g_pos, r_neu).rowwise().sum();
    const Eigen::VectorXd load_neg = series_load(s.g_neg, r_neu).rowwise().sum();
    f.source_mult_pos = (1.0 + r_s * load_pos.array()).inverse();
    f.source_mult_neg = (1.0 + r_s * load_neg.array()).inverse();
    f.gamma = 1.0 + r_neu * (s.g_pos + s.g_neg).colwise().sum().array();
    return f;
}

Eigen::VectorXd forward(const SplitConductance& s, const DegradationFactors& f,
                        const Eigen::VectorXd& a) {
    if (a.size() != s.rows())
        throw ConfigError("xbar forward: input length " + std::to_string(a.size()) +
                          " does not match crossbar rows " + std::to_string(s.rows()));
    if (factors_are_ideal(f)) return s.net().transpose() * a;
    const Eigen::VectorXd drive_pos = a.cwiseProduct(f.source_mult_pos);
    const Eigen::VectorXd drive_neg = a.cwiseProduct(f.source_mult_neg);
    Eigen::VectorXd z = s.g_pos.transpose() * drive_pos - s.g_neg.transpose() * drive_neg;
    return z.cwiseQuotient(f.gamma);
}

Eigen::VectorXd forward(const SplitConductance& s, const NonIdealityConfig& cfg,
                        const Eigen::VectorXd& a) {
    return forward(s, degradation_factors(s, cfg), a);
}

TileGrid partition(const SplitConductance& s, Eigen::Index m, Eigen::Index n) {
    if (m < 1 || n < 1)
        throw ConfigError("partition: tile dimensions must be positive");
    if (m > s.rows() || n > s.cols())
        throw ConfigError("partition: tile " + std::to_string(m) + "x" + std::to_string(n) +
                          " exceeds crossbar " + std::to_string(s.rows()) + "x" +
                          std::to_string(s.cols()));
    TileGrid grid;
    grid.logical_rows = s.rows();
    grid.logical_cols = s.cols();
    grid.tile_rows = m;
    grid.tile_cols = n;
    for (Eigen::Index r0 = 0; r0 < s.rows(); r0 += m) {
        const Eigen::Index h = std::min(m, s.rows() - r0);
        for (Eigen::Index c0 = 0; c0 < s.cols(); c0 += n) {
            const Eigen::Index w = std::min(n, s.cols() - c0);
            SplitConductance block;
            block.g_pos = s.g_pos.block(r0, c0, h, w);
            block.g_neg = s.g_neg.block(r0, c0, h, w);
            block.pos_present = s.pos_present.block(r0, c0, h, w);
            block.neg_present = s.neg_present.block(r0, c0, h, w);
            grid.tiles.push_back(std::move(block));
        }
    }
    return grid;
}

std::vector<DegradationFactors> tile_factors(const TileGrid& grid,
                                             const NonIdealityConfig& cfg) {
    std::vector<DegradationFactors> factors;
    factors.reserve(grid.tiles.size());
    for (const auto& tile : grid.tiles) factors.push_back(degradation_factors(tile, cfg));
    return factors;
}

Eigen::VectorXd tiled_forward(const TileGrid& grid,
                              const std::vector<DegradationFactors>& factors,
                              const Eigen::VectorXd& a) {
    if (a.size() != grid.logical_rows)
        throw ConfigError("tiled_forward: input length does not match crossbar rows");
    if (factors.size() != grid.tiles.size())
        throw ConfigError("tiled_forward: factor count does not match tile count");

    Eigen::VectorXd z(grid.logical_cols);
    for (Eigen::Index cb = 0; cb < grid.col_blocks(); ++cb) {
        std::vector<Eigen::VectorXd> partials;
        partials.reserve(static_cast<size_t>(grid.row_blocks()));
        for (Eigen::Index rb = 0; rb < grid.row_blocks(); ++rb) {
            const auto& tile = grid.tile(rb, cb);
            const auto& f = factors[static_cast<size_t>(rb * grid.col_blocks() + cb)];
            partials.push_back(forward(tile, f, a.segment(grid.row_start(rb), tile.rows())));
        }
        const Eigen::VectorXd col_sum = pairwise_sum(std::move(partials));
        z.segment(grid.col_start(cb), col_sum.size()) = col_sum;
    }
    return z;
}

Eigen::VectorXd tiled_forward(const TileGrid& grid, const NonIdealityConfig& cfg,
                              const Eigen::VectorXd& a) {
    return tiled_forward(grid, tile_factors(grid, cfg), a);
}

}  // namespace xbarnn
