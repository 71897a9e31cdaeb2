#pragma once

#include "xbarnn/tech.hpp"

#include <Eigen/Dense>

#include <vector>

namespace xbarnn {

// Input- and output-side degradation of one crossbar, cacheable per weight
// state since it depends only on the programmed conductances.
//
// source_mult holds the per-row input attenuation in multiplicative form
// 1 / (1 + R_s * sum_j 1/(R_ij + R_neu)), which is exact at R_s == 0.
// gamma holds the per-column neuron loading divisor
// 1 + R_neu * sum_i (g_pos + g_neg).
struct DegradationFactors {
    Eigen::VectorXd source_mult_pos;  // length M, in (0, 1]
    Eigen::VectorXd source_mult_neg;  // length M, in (0, 1]
    Eigen::VectorXd gamma;            // length N, >= 1
};

DegradationFactors degradation_factors(const SplitConductance& s,
                                       const NonIdealityConfig& cfg);

// True when no degradation is in effect (R_s == 0 and R_neu == 0 give
// exactly 1.0 everywhere). Evaluation then reduces to the plain signed
// dot product, bit for bit.
inline bool factors_are_ideal(const DegradationFactors& f) {
    return (f.source_mult_pos.array() == 1.0).all() &&
           (f.source_mult_neg.array() == 1.0).all() && (f.gamma.array() == 1.0).all();
}

// Non-ideal crossbar output for one input vector:
//   z_j = (sum_i a_i * smp_i * gpos_ij - sum_i a_i * smn_i * gneg_ij) / gamma_j.
// Callers pass a single nonnegative activation vector; the negative array's
// inverted drive is folded into the subtraction. With an all-zero config
// this reduces exactly to the ideal signed dot product.
Eigen::VectorXd forward(const SplitConductance& s, const DegradationFactors& f,
                        const Eigen::VectorXd& a);
Eigen::VectorXd forward(const SplitConductance& s, const NonIdealityConfig& cfg,
                        const Eigen::VectorXd& a);

// A large logical crossbar realized as a grid of small physical ones.
// Contiguous row-major blocks; edge tiles keep their natural smaller size
// so no phantom devices alter the degradation factors.
struct TileGrid {
    Eigen::Index logical_rows = 0, logical_cols = 0;  // M, N
    Eigen::Index tile_rows = 0, tile_cols = 0;        // m, n
    std::vector<SplitConductance> tiles;              // row-major blocks

    Eigen::Index row_blocks() const {
        return (logical_rows + tile_rows - 1) / tile_rows;
    }
    Eigen::Index col_blocks() const {
        return (logical_cols + tile_cols - 1) / tile_cols;
    }
    const SplitConductance& tile(Eigen::Index rb, Eigen::Index cb) const {
        return tiles[static_cast<size_t>(rb * col_blocks() + cb)];
    }
    Eigen::Index row_start(Eigen::Index rb) const { return rb * tile_rows; }
    Eigen::Index col_start(Eigen::Index cb) const { return cb * tile_cols; }
};

TileGrid partition(const SplitConductance& s, Eigen::Index m, Eigen::Index n);

// Per-tile factors, row-major, matching TileGrid::tiles.
std::vector<DegradationFactors> tile_factors(const TileGrid& grid,
                                             const NonIdealityConfig& cfg);

// Evaluates every tile independently with its own factors and sums column
// outputs across row blocks (pairwise, for reproducibility).
Eigen::VectorXd tiled_forward(const TileGrid& grid,
                              const std::vector<DegradationFactors>& factors,
                              const Eigen::VectorXd& a);
Eigen::VectorXd tiled_forward(const TileGrid& grid, const NonIdealityConfig& cfg,
                              const Eigen::VectorXd& a);

}  // namespace xbarnn
