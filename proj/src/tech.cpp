#include "xbarnn/tech.hpp"

#include "xbarnn/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace xbarnn {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

struct PresetRow {
    const char* name;
    double r_on, r_off, r_low, r_high;
};

// Resistance ranges per technology, ohms. The used range keeps a fixed
// r_high/r_low ratio of kLevels. The spintronic device range is not pinned
// by measurement, so it brackets the used range with a decade of margin.
constexpr PresetRow kPresets[] = {
    {"TiO2", 15e3, 2e6, 40e3, 600e3},
    {"AgSi", 25e3, 10e6, 100e3, 1.5e6},
    {"TaOx", 1e3, 1e6, 20e3, 300e3},
    {"Spintronics", 10e3, 6e6, 40e3, 600e3},
    {"PCM", 10e3, 3e6, 60e3, 900e3},
};

}  // namespace

void TechnologyProfile::validate() const {
    if (!(r_on > 0) || !(r_off > 0) || !(r_low > 0) || !(r_high > 0))
        throw ConfigError("technology '" + name + "': resistances must be positive");
    if (!(r_on < r_low && r_low < r_high && r_high < r_off))
        throw ConfigError("technology '" + name +
                          "': expected r_on < r_low < r_high < r_off");
    if (std::abs(r_high / r_low - kLevels) > 1e-9 * kLevels)
        throw ConfigError("technology '" + name + "': r_high must equal " +
                          std::to_string(kLevels) + " * r_low");
    if (!(alpha > 0))
        throw ConfigError("technology '" + name + "': alpha must be positive");
    if (std::abs(alpha / r_off - 1.0 / r_high) > 1e-9 / r_high)
        throw ConfigError("technology '" + name + "': alpha / r_off must equal g_low");
}

TechnologyProfile make_profile(const std::string& name) {
    for (const auto& row : kPresets) {
        if (lower(name) == lower(row.name)) {
            TechnologyProfile p{row.name, row.r_on, row.r_off, row.r_low, row.r_high,
                                row.r_off / row.r_high};
            p.validate();
            return p;
        }
    }
    std::ostringstream msg;
    msg << "unknown technology preset '" << name << "' (available:";
    for (const auto& row : kPresets) msg << ' ' << row.name;
    msg << ")";
    throw ConfigError(msg.str());
}

TechnologyProfile make_custom_profile(std::string name, double r_on, double r_off,
                                      double r_low, double r_high, double alpha) {
    if (alpha == 0.0 && r_high > 0) alpha = r_off / r_high;
    TechnologyProfile p{std::move(name), r_on, r_off, r_low, r_high, alpha};
    p.validate();
    return p;
}

std::vector<std::string> profile_names() {
    std::vector<std::string> names;
    for (const auto& row : kPresets) names.emplace_back(row.name);
    return names;
}

void NonIdealityConfig::validate() const {
    if (!(rs_ratio >= 0.0) || !(rneu_ratio >= 0.0))
        throw ConfigError("non-ideality ratios must be nonnegative");
    if (k_sigma < -2 || k_sigma > 2)
        throw ConfigError("k_sigma must lie in [-2, +2]");
    if (!(sigma_unit >= 0.0) || !std::isfinite(sigma_unit))
        throw ConfigError("sigma_unit must be nonnegative and finite");
}

QuantizedWeights quantize(const Eigen::MatrixXd& weights, double clip_percentile) {
    if (!(clip_percentile > 0.0 && clip_percentile <= 100.0))
        throw ConfigError("clip_percentile must lie in (0, 100]");
    if (!weights.allFinite())
        throw ConfigError("quantize: weight matrix has non-finite entries");

    std::vector<double> mags;
    mags.reserve(static_cast<size_t>(weights.size()));
    for (Eigen::Index j = 0; j < weights.cols(); ++j)
        for (Eigen::Index i = 0; i < weights.rows(); ++i)
            if (weights(i, j) != 0.0) mags.push_back(std::abs(weights(i, j)));
    if (mags.empty())
        throw ConfigError("quantize: all-zero weight matrix, scale undefined");

    // Nearest-rank percentile over nonzero magnitudes; 100 is the max.
    auto rank = static_cast<size_t>(
        std::ceil(clip_percentile / 100.0 * static_cast<double>(mags.size())));
    rank = std::min(std::max<size_t>(rank, 1), mags.size());
    std::nth_element(mags.begin(), mags.begin() + (rank - 1), mags.end());
    const double scale = mags[rank - 1];

    QuantizedWeights q;
    q.scale = scale;
    q.magnitudes.resize(weights.rows(), weights.cols());
    q.signs.resize(weights.rows(), weights.cols());
    for (Eigen::Index j = 0; j < weights.cols(); ++j) {
        for (Eigen::Index i = 0; i < weights.rows(); ++i) {
            const double w = weights(i, j);
            const double clipped = std::min(std::abs(w) / scale, 1.0);
            // Half away from zero; the argument is nonnegative.
            const double level = std::floor(clipped * kLevels + 0.5);
            q.magnitudes(i, j) = level / kLevels;
            q.signs(i, j) = (level == 0.0) ? 0 : (w > 0.0 ? 1 : -1);
        }
    }
    return q;
}

Eigen::MatrixXd dequantize(const QuantizedWeights& q) {
    return q.scale * (q.magnitudes.array() * q.signs.cast<double>().array()).matrix();
}

QuantizedWeights passthrough_weights(const Eigen::MatrixXd& weights) {
    if (!weights.allFinite())
        throw ConfigError("passthrough_weights: weight matrix has non-finite entries");
    QuantizedWeights q;
    q.scale = 1.0;
    q.magnitudes = weights.cwiseAbs();
    q.signs = weights.unaryExpr([](double w) { return w > 0.0 ? 1.0 : (w < 0.0 ? -1.0 : 0.0); })
                  .cast<int>();
    return q;
}

SplitConductance split_signed(const QuantizedWeights& q) {
    SplitConductance s;
    const auto pos = (q.signs.array() > 0).cast<double>();
    const auto neg = (q.signs.array() < 0).cast<double>();
    s.g_pos = (q.magnitudes.array() * pos).matrix();
    s.g_neg = (q.magnitudes.array() * neg).matrix();
    s.pos_present = (q.signs.array() > 0);
    s.neg_present = (q.signs.array() < 0);
    return s;
}

SplitConductance apply_variation(const SplitConductance& s, const NonIdealityConfig& cfg) {
    const double delta = cfg.delta();
    if (delta == 0.0) return s;
    SplitConductance out = s;
    auto shift = [delta](Eigen::MatrixXd& g, const BoolMatrix& present) {
        for (Eigen::Index j = 0; j < g.cols(); ++j)
            for (Eigen::Index i = 0; i < g.rows(); ++i)
                if (present(i, j)) g(i, j) = std::max(g(i, j) + delta, 0.0);
    };
    shift(out.g_pos, out.pos_present);
    shift(out.g_neg, out.neg_present);
    return out;
}

}  // namespace xbarnn
