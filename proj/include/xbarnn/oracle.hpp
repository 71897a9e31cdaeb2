#pragma once

#include "xbarnn/tech.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <memory>
#include <vector>

namespace xbarnn {

// Exact circuit ground truth for one crossbar pair. Builds the resistive
// network -- ideal sources behind R_s per row (positive array driven at +a,
// negative at -a), devices at the crosspoints, both arrays sharing one
// neuron node per column through R_neu to ground -- and solves the nodal
// equations with a dense symmetric factorization.
//
// The zero-resistance corners are handled by exact node elimination:
// R_s == 0 fixes the row voltages, R_neu == 0 grounds the neuron nodes.

// Isolated nodes are eliminated exactly: a row with no conducting device in
// an array contributes nothing, and a column with no devices carries zero
// current. A fully populated pair of arrays in the Full regime therefore
// has 2M row nodes plus N neuron nodes.
enum class CircuitRegime {
    Full,         // R_s > 0 and R_neu > 0
    SourceIdeal,  // R_s == 0: row voltages fixed, neuron nodes remain
    NeuronIdeal,  // R_neu == 0: neuron nodes grounded, row nodes remain
    Ideal,        // both zero: output is the plain signed dot product
};

struct ConductanceSystem {
    CircuitRegime regime = CircuitRegime::Ideal;
    Eigen::Index node_count = 0;
    Eigen::MatrixXd g_matrix;  // symmetric node conductance matrix
    Eigen::VectorXd i_vector;  // Norton source injections
    std::vector<Eigen::Index> column_node_index;  // output column -> node, -1 if grounded

    // Retained for output extraction in the reduced regimes.
    SplitConductance devices;
    NonIdealityConfig cfg;
    Eigen::VectorXd input;
};

ConductanceSystem build_system(const SplitConductance& s, const NonIdealityConfig& cfg,
                               const Eigen::VectorXd& a);

// Direct dense solve; output current of column j is v(node_j) / R_neu, or
// the sum of device branch currents into ground when R_neu == 0. Enforces
// a KCL residual below 1e-10 relative.
Eigen::VectorXd solve_currents(const ConductanceSystem& sys);

// Factorizes the conductance matrix once per (weights, cfg) and reuses it
// across inputs; the matrix does not depend on the applied voltages.
class CrossbarOracle {
public:
    CrossbarOracle(SplitConductance s, NonIdealityConfig cfg);
    ~CrossbarOracle();

    Eigen::VectorXd currents(const Eigen::VectorXd& a) const;

    CircuitRegime regime() const { return regime_; }
    Eigen::Index node_count() const { return node_count_; }

private:
    struct Impl;
    SplitConductance s_;
    NonIdealityConfig cfg_;
    CircuitRegime regime_;
    Eigen::Index node_count_ = 0;
    Eigen::MatrixXd g_;
    Eigen::LDLT<Eigen::MatrixXd> ldlt_;
    std::unique_ptr<Impl> impl_;
};

// Root-mean-square deviation between model and oracle outputs, normalized
// by the oracle output range.
double nrmsd(const Eigen::VectorXd& model_out, const Eigen::VectorXd& oracle_out);

// Line-oriented netlist ("R <node_a> <node_b> <ohms>", "I <node> <amps>")
// in physical units for cross-checking with external circuit simulators.
// Ground is node 0. Requires both resistances nonzero.
void write_netlist(std::ostream& os, const SplitConductance& s,
                   const NonIdealityConfig& cfg, const Eigen::VectorXd& a,
                   const TechnologyProfile& tech);

}  // namespace xbarnn
