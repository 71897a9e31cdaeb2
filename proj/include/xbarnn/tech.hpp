#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace xbarnn {

// Number of nonzero conductance levels in the 4-bit grid. By construction
// this is also the R_high/R_low ratio of the used synaptic range, so the
// largest programmed weight keeps a 15:1 ratio to the smallest one.
inline constexpr int kLevels = 15;

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Device resistance ranges for one synaptic technology. The used range
// [r_low, r_high] sits strictly inside the device range [r_on, r_off].
struct TechnologyProfile {
    std::string name;
    double r_on = 0;    // ohms
    double r_off = 0;   // ohms
    double r_low = 0;   // ohms, lowest used synaptic resistance
    double r_high = 0;  // ohms, highest used synaptic resistance
    double alpha = 0;   // placement parameter, g_low = alpha / r_off

    double g_low() const { return 1.0 / r_high; }
    double g_high() const { return 1.0 / r_low; }

    void validate() const;
};

// Returns one of the built-in presets: TiO2, AgSi, TaOx, Spintronics, PCM.
TechnologyProfile make_profile(const std::string& name);

// Validates a user-supplied profile; alpha is derived when left at zero.
TechnologyProfile make_custom_profile(std::string name, double r_on, double r_off,
                                      double r_low, double r_high, double alpha = 0.0);

std::vector<std::string> profile_names();

// The full hardware corner: lumped source and neuron resistance ratios plus
// the chip-to-chip conductance offset. All model math runs in normalized
// units with G_high == 1, so R_high == kLevels and the physical ohm values
// of a TechnologyProfile only matter for reporting.
struct NonIdealityConfig {
    double rs_ratio = 0.0;         // R_s / R_high
    double rneu_ratio = 0.0;       // R_neu / R_high
    int k_sigma = 0;               // chip corner, integer in [-2, +2]
    double sigma_unit = 1.0 / 30;  // one sigma, normalized conductance units

    double source_resistance() const { return kLevels * rs_ratio; }
    double neuron_resistance() const { return kLevels * rneu_ratio; }
    double delta() const { return k_sigma * sigma_unit; }
    bool is_ideal() const { return rs_ratio == 0.0 && rneu_ratio == 0.0 && k_sigma == 0; }

    void validate() const;
};

// Weights snapped to the 16-point grid {0, 1/15, ..., 1}. A magnitude of
// zero is an open connection (no device), and signs is zero exactly there.
struct QuantizedWeights {
    Eigen::MatrixXd magnitudes;
    Eigen::MatrixXi signs;  // -1, 0, +1
    double scale = 0;       // |w| == scale maps to magnitude 1
};

// One signed weight matrix as two nonnegative conductance arrays with
// disjoint support. Presence masks distinguish a device whose varied
// conductance clamped to zero from a crosspoint that never had a device.
struct SplitConductance {
    Eigen::MatrixXd g_pos;
    Eigen::MatrixXd g_neg;
    BoolMatrix pos_present;
    BoolMatrix neg_present;

    Eigen::Index rows() const { return g_pos.rows(); }
    Eigen::Index cols() const { return g_pos.cols(); }
    // Signed reconstruction g_pos - g_neg.
    Eigen::MatrixXd net() const { return g_pos - g_neg; }
};

// Maps real weights onto the 4-bit grid. The scale is the
// clip_percentile-th percentile (nearest rank) of |w| over nonzero entries;
// entries above it clip to 1, entries rounding to zero become open
// connections. Rounding is half away from zero.
QuantizedWeights quantize(const Eigen::MatrixXd& weights, double clip_percentile = 100.0);

// Real-valued reconstruction sign * magnitude * scale.
Eigen::MatrixXd dequantize(const QuantizedWeights& q);

// Identity "quantization" used when discretization is disabled: magnitudes
// are raw |w| with scale 1 and no grid snapping.
QuantizedWeights passthrough_weights(const Eigen::MatrixXd& weights);

SplitConductance split_signed(const QuantizedWeights& q);

// Shifts every present device by k_sigma * sigma_unit, clamping at zero.
// Open connections are untouched and presence is preserved.
SplitConductance apply_variation(const SplitConductance& s, const NonIdealityConfig& cfg);

}  // namespace xbarnn
