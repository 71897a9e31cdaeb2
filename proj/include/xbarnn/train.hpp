#pragma once

#include "xbarnn/data.hpp"
#include "xbarnn/tech.hpp"
#include "xbarnn/xbar.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace xbarnn {

double sigmoid(double x);
// Sigmoid derivative evaluated from the activation value: a * (1 - a).
double sigmoid_deriv_from_output(double a);

// Half sum of squared errors.
double mse_loss(const Eigen::VectorXd& a_out, const Eigen::VectorXd& y);

enum class TrainMode { Ideal, Aware };

// Tile shape (rows, cols) per layer.
using TileSpec = std::vector<std::pair<Eigen::Index, Eigen::Index>>;

struct TrainConfig {
    TrainMode mode = TrainMode::Ideal;
    int epochs = 10;
    Eigen::Index batch_size = 100;
    double learning_rate = 0.5;
    double lr_decay = 1.0;             // per-epoch multiplier in (0, 1]
    uint64_t seed = 1;
    NonIdealityConfig nonideal;
    std::optional<TileSpec> tiling;    // one (m, n) per layer when set
    double clip_percentile = 100.0;
    bool quantize_weights = true;      // false: conductances are raw weights

    void validate(size_t layer_count) const;
};

// Hardware view of one layer, re-derived from the master weights after
// every update: quantized magnitudes, split conductances with variation
// applied, the tile partition (a single tile when untiled), and the cached
// per-tile degradation factors.
struct LayerShadow {
    QuantizedWeights q;
    SplitConductance split;
    TileGrid grid;
    std::vector<DegradationFactors> factors;
};

struct ShadowState {
    std::vector<LayerShadow> layers;
};

// Fully connected stack; weights_[l] has shape dims[l] x dims[l+1] and all
// layers use the sigmoid activation. Master weights stay full precision;
// hardware effects live only in the shadow state.
class Network {
public:
    Network(std::vector<Eigen::Index> layer_dims, uint64_t seed);
    static Network from_weights(std::vector<Eigen::MatrixXd> weights);

    const std::vector<Eigen::Index>& layer_dims() const { return dims_; }
    size_t layer_count() const { return weights_.size(); }
    std::vector<Eigen::MatrixXd>& master_weights() { return weights_; }
    const std::vector<Eigen::MatrixXd>& master_weights() const { return weights_; }

private:
    Network() = default;
    std::vector<Eigen::Index> dims_;
    std::vector<Eigen::MatrixXd> weights_;
};

ShadowState build_shadow(const std::vector<Eigen::MatrixXd>& weights,
                         const TrainConfig& cfg);

// Re-partitions and re-caches factors after the split conductances of one
// layer were edited in place (finite-difference probes do this).
void rebuild_tiles(LayerShadow& layer, const TrainConfig& cfg, size_t layer_index);

struct ForwardRecord {
    Eigen::MatrixXd input;                 // batch x dims[0]
    std::vector<Eigen::MatrixXd> preact;   // z per layer (scaled crossbar output)
    std::vector<Eigen::MatrixXd> act;      // sigmoid(z) per layer
    // Aware mode: per layer, per tile crossbar outputs before scaling.
    std::vector<std::vector<Eigen::MatrixXd>> tile_out;
};

// Batched forward over rows of `input`. `shadow` is required in aware mode
// and must be in sync with the master weights.
Eigen::MatrixXd forward_batch(const Network& net, const ShadowState* shadow,
                              const TrainConfig& cfg, const Eigen::MatrixXd& input,
                              ForwardRecord* record = nullptr);

struct Gradients {
    // d(sum of per-sample losses)/d(master weights), straight-through
    // across the quantizer.
    std::vector<Eigen::MatrixXd> weights;
    // Aware mode: exact partials with respect to the post-variation split
    // conductances, including their effect on the degradation factors.
    std::vector<Eigen::MatrixXd> g_pos;
    std::vector<Eigen::MatrixXd> g_neg;
};

Gradients backward_batch(const Network& net, const ShadowState* shadow,
                         const TrainConfig& cfg, const ForwardRecord& record,
                         const Eigen::MatrixXd& targets);

// Single-sample views of the batched engine.
ForwardRecord forward_pass(const Network& net, const Eigen::VectorXd& x,
                           const TrainConfig& cfg);
Gradients backward_pass(const Network& net, const ShadowState* shadow,
                        const TrainConfig& cfg, const ForwardRecord& record,
                        const Eigen::VectorXd& y);

struct EpochStats {
    int epoch = 0;
    double loss = 0;             // mean per-sample loss over the epoch
    double train_accuracy = 0;   // percent, measured on the training batches
    double test_accuracy = 0;    // percent
};
using TrainHistory = std::vector<EpochStats>;

// Mini-batch gradient descent. In aware mode every iteration re-quantizes,
// re-splits, re-applies variation and recomputes the degradation factors
// before the forward/backward sweep. Throws NumericError on divergence.
TrainHistory train(Network& net, const Dataset& train_ds, const Dataset& test_ds,
                   const TrainConfig& cfg,
                   const std::function<void(const EpochStats&)>& on_epoch = {});

// Accuracy in percent under the given evaluation config (cfg.mode selects
// the ideal or hardware path; loop parameters are ignored).
double evaluate(const Network& net, const Dataset& ds, const TrainConfig& cfg);

struct Checkpoint {
    std::vector<Eigen::Index> layer_dims;
    std::vector<Eigen::MatrixXd> weights;
    std::vector<double> scales;  // quantizer scale per layer at save time
    TrainConfig cfg;
};

void save_checkpoint(const std::string& path, const Network& net, const TrainConfig& cfg);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace xbarnn
