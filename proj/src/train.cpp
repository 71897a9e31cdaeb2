#include "xbarnn/train.hpp"

#include "xbarnn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

namespace xbarnn {

namespace {

constexpr char kCheckpointMagic[4] = {'X', 'B', 'N', 'N'};
constexpr uint32_t kCheckpointVersion = 1;

uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

uint64_t epoch_seed(uint64_t seed, int epoch) {
    return splitmix64(seed ^ (0x9E3779B97F4A7C15ull * static_cast<uint64_t>(epoch + 1)));
}

Eigen::MatrixXd sigmoid_matrix(const Eigen::MatrixXd& z) {
    return z.unaryExpr([](double x) { return sigmoid(x); });
}

// Sums equally sized matrices pairwise, mirroring the tiled_forward
// reduction order.
Eigen::MatrixXd pairwise_sum(std::vector<Eigen::MatrixXd> parts) {
    while (parts.size() > 1) {
        std::vector<Eigen::MatrixXd> next;
        next.reserve((parts.size() + 1) / 2);
        for (size_t i = 0; i + 1 < parts.size(); i += 2)
            next.push_back(parts[i] + parts[i + 1]);
        if (parts.size() % 2 == 1) next.push_back(parts.back());
        parts = std::move(next);
    }
    return parts.front();
}

}  // namespace

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double sigmoid_deriv_from_output(double a) { return a * (1.0 - a); }

double mse_loss(const Eigen::VectorXd& a_out, const Eigen::VectorXd& y) {
    if (a_out.size() != y.size()) throw ConfigError("mse_loss: dimension mismatch");
    return 0.5 * (a_out - y).squaredNorm();
}

void TrainConfig::validate(size_t layer_count) const {
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (!(lr_decay > 0.0 && lr_decay <= 1.0))
        throw ConfigError("lr_decay must lie in (0, 1]");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (epochs < 0) throw ConfigError("epochs must be nonnegative");
    if (!(clip_percentile > 0.0 && clip_percentile <= 100.0))
        throw ConfigError("clip_percentile must lie in (0, 100]");
    nonideal.validate();
    if (tiling && tiling->size() != layer_count)
        throw ConfigError("tiling must list one (rows, cols) pair per layer");
}

Network::Network(std::vector<Eigen::Index> layer_dims, uint64_t seed) {
    if (layer_dims.size() < 2) throw ConfigError("network needs at least two layer dims");
    for (auto d : layer_dims)
        if (d < 1) throw ConfigError("layer dims must be positive");
    dims_ = std::move(layer_dims);
    std::mt19937_64 rng(seed);
    for (size_t l = 0; l + 1 < dims_.size(); ++l) {
        const Eigen::Index fan_in = dims_[l], fan_out = dims_[l + 1];
        const double r = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        std::uniform_real_distribution<double> dist(-r, r);
        Eigen::MatrixXd w(fan_in, fan_out);
        for (Eigen::Index i = 0; i < fan_in; ++i)
            for (Eigen::Index j = 0; j < fan_out; ++j) w(i, j) = dist(rng);
        weights_.push_back(std::move(w));
    }
}

Network Network::from_weights(std::vector<Eigen::MatrixXd> weights) {
    if (weights.empty()) throw ConfigError("from_weights: no layers");
    Network net;
    net.dims_.push_back(weights.front().rows());
    for (size_t l = 0; l < weights.size(); ++l) {
        if (l > 0 && weights[l].rows() != weights[l - 1].cols())
            throw ConfigError("from_weights: inconsistent layer shapes");
        net.dims_.push_back(weights[l].cols());
    }
    net.weights_ = std::move(weights);
    return net;
}

void rebuild_tiles(LayerShadow& layer, const TrainConfig& cfg, size_t layer_index) {
    Eigen::Index m = layer.split.rows(), n = layer.split.cols();
    if (cfg.tiling) {
        m = (*cfg.tiling)[layer_index].first;
        n = (*cfg.tiling)[layer_index].second;
    }
    layer.grid = partition(layer.split, m, n);
    layer.factors = tile_factors(layer.grid, cfg.nonideal);
}

ShadowState build_shadow(const std::vector<Eigen::MatrixXd>& weights,
                         const TrainConfig& cfg) {
    ShadowState shadow;
    shadow.layers.resize(weights.size());
    for (size_t l = 0; l < weights.size(); ++l) {
        LayerShadow& ls = shadow.layers[l];
        ls.q = cfg.quantize_weights ? quantize(weights[l], cfg.clip_percentile)
                                    : passthrough_weights(weights[l]);
        ls.split = apply_variation(split_signed(ls.q), cfg.nonideal);
        rebuild_tiles(ls, cfg, l);
    }
    return shadow;
}

namespace {

// One aware layer: z = scale * sum over row blocks of per-tile outputs
//   c = ((a .* smp) * gpos - (a .* smn) * gneg) ./ gamma.
Eigen::MatrixXd aware_layer_forward(const LayerShadow& ls, const Eigen::MatrixXd& input,
                                    std::vector<Eigen::MatrixXd>* tile_out) {
    const TileGrid& grid = ls.grid;
    Eigen::MatrixXd z(input.rows(), grid.logical_cols);
    if (tile_out) tile_out->resize(grid.tiles.size());

    for (Eigen::Index cb = 0; cb < grid.col_blocks(); ++cb) {
        std::vector<Eigen::MatrixXd> partials;
        partials.reserve(static_cast<size_t>(grid.row_blocks()));
        for (Eigen::Index rb = 0; rb < grid.row_blocks(); ++rb) {
            const size_t t = static_cast<size_t>(rb * grid.col_blocks() + cb);
            const SplitConductance& tile = grid.tiles[t];
            const DegradationFactors& f = ls.factors[t];
            const auto a_tile = input.middleCols(grid.row_start(rb), tile.rows());
            Eigen::MatrixXd c;
            if (factors_are_ideal(f)) {
                c = a_tile * tile.net();
            } else {
                const Eigen::MatrixXd drive_pos =
                    a_tile.array().rowwise() * f.source_mult_pos.transpose().array();
                const Eigen::MatrixXd drive_neg =
                    a_tile.array().rowwise() * f.source_mult_neg.transpose().array();
                c = drive_pos * tile.g_pos - drive_neg * tile.g_neg;
                c.array().rowwise() /= f.gamma.transpose().array();
            }
            if (tile_out) (*tile_out)[t] = c;
            partials.push_back(std::move(c));
        }
        Eigen::MatrixXd col_sum = pairwise_sum(std::move(partials));
        z.middleCols(grid.col_start(cb), col_sum.cols()) = col_sum;
    }
    return ls.q.scale * z;
}

struct AwareLayerGrads {
    Eigen::MatrixXd input;  // dL/d(layer input), batch x M
    Eigen::MatrixXd g_pos;  // dL/d(gpos), M x N
    Eigen::MatrixXd g_neg;
};

// Exact derivative of the aware layer, including the dependence of the
// degradation factors on the conductances.
AwareLayerGrads aware_layer_backward(const LayerShadow& ls, const Eigen::MatrixXd& input,
                                     const std::vector<Eigen::MatrixXd>& tile_out,
                                     const NonIdealityConfig& cfg,
                                     const Eigen::MatrixXd& dz) {
    const TileGrid& grid = ls.grid;
    const double r_s = cfg.source_resistance();
    const double r_neu = cfg.neuron_resistance();
    const Eigen::MatrixXd dc = ls.q.scale * dz;

    AwareLayerGrads out;
    out.input = Eigen::MatrixXd::Zero(input.rows(), grid.logical_rows);
    out.g_pos = Eigen::MatrixXd::Zero(grid.logical_rows, grid.logical_cols);
    out.g_neg = Eigen::MatrixXd::Zero(grid.logical_rows, grid.logical_cols);

    for (Eigen::Index rb = 0; rb < grid.row_blocks(); ++rb) {
        for (Eigen::Index cb = 0; cb < grid.col_blocks(); ++cb) {
            const size_t t = static_cast<size_t>(rb * grid.col_blocks() + cb);
            const SplitConductance& tile = grid.tiles[t];
            const DegradationFactors& f = ls.factors[t];
            const Eigen::Index r0 = grid.row_start(rb), h = tile.rows();
            const Eigen::Index c0 = grid.col_start(cb), w = tile.cols();

            const auto a_tile = input.middleCols(r0, h);

            if (factors_are_ideal(f)) {
                const Eigen::MatrixXd dg = dc.middleCols(c0, w);
                out.input.middleCols(r0, h).noalias() += dg * tile.net().transpose();
                const Eigen::MatrixXd gp = a_tile.transpose() * dg;
                out.g_pos.block(r0, c0, h, w) = gp;
                out.g_neg.block(r0, c0, h, w) = -gp;
                continue;
            }

            Eigen::MatrixXd dg = dc.middleCols(c0, w);
            dg.array().rowwise() /= f.gamma.transpose().array();

            const Eigen::MatrixXd u_pos = dg * tile.g_pos.transpose();  // batch x h
            const Eigen::MatrixXd u_neg = dg * tile.g_neg.transpose();
            out.input.middleCols(r0, h).array() +=
                u_pos.array().rowwise() * f.source_mult_pos.transpose().array() -
                u_neg.array().rowwise() * f.source_mult_neg.transpose().array();

            const Eigen::MatrixXd drive_pos =
                a_tile.array().rowwise() * f.source_mult_pos.transpose().array();
            const Eigen::MatrixXd drive_neg =
                a_tile.array().rowwise() * f.source_mult_neg.transpose().array();

            // Direct conductance term.
            Eigen::MatrixXd gp = drive_pos.transpose() * dg;
            Eigen::MatrixXd gn = -(drive_neg.transpose() * dg);

            // Neuron-loading term: gamma grows with any conductance in the column.
            const Eigen::RowVectorXd t_gamma =
                r_neu * (tile_out[t].array() * dg.array()).colwise().sum();
            gp.array().rowwise() -= t_gamma.array();
            gn.array().rowwise() -= t_gamma.array();

            if (r_s > 0.0) {
                // Source-loading term: the row multiplier shrinks as its own
                // row's conductances grow.
                const Eigen::VectorXd au_pos = (a_tile.array() * u_pos.array()).colwise().sum();
                const Eigen::VectorXd au_neg = (a_tile.array() * u_neg.array()).colwise().sum();
                const Eigen::VectorXd v_pos =
                    r_s * f.source_mult_pos.array().square() * au_pos.array();
                const Eigen::VectorXd v_neg =
                    r_s * f.source_mult_neg.array().square() * au_neg.array();
                const Eigen::ArrayXXd tp =
                    (1.0 + r_neu * tile.g_pos.array()).inverse().square();
                const Eigen::ArrayXXd tn =
                    (1.0 + r_neu * tile.g_neg.array()).inverse().square();
                gp.noalias() -= v_pos.asDiagonal() * tp.matrix();
                gn.noalias() += v_neg.asDiagonal() * tn.matrix();
            }

            out.g_pos.block(r0, c0, h, w) = gp;
            out.g_neg.block(r0, c0, h, w) = gn;
        }
    }
    return out;
}

// Straight-through chain from conductance gradients to the master weights:
// the quantizer acts as identity inside the clip range and blocks gradients
// outside it; sign routing picks the array the weight is programmed on.
Eigen::MatrixXd master_gradient(const Eigen::MatrixXd& weights, const LayerShadow& ls,
                                bool quantized, const Eigen::MatrixXd& g_pos,
                                const Eigen::MatrixXd& g_neg) {
    const auto w = weights.array();
    Eigen::ArrayXXd routed = (w >= 0.0).select(g_pos.array(), -g_neg.array());
    if (quantized)
        routed = (w.abs() <= ls.q.scale).select(routed, Eigen::ArrayXXd::Zero(w.rows(), w.cols()));
    return (routed / ls.q.scale).matrix();
}

void check_shadow(const Network& net, const ShadowState* shadow) {
    if (!shadow || shadow->layers.size() != net.layer_count())
        throw ConfigError("aware mode requires a shadow state in sync with the network");
    for (size_t l = 0; l < net.layer_count(); ++l) {
        if (shadow->layers[l].split.rows() != net.layer_dims()[l] ||
            shadow->layers[l].split.cols() != net.layer_dims()[l + 1])
            throw ConfigError("shadow state is stale (layer shape mismatch)");
    }
}

}  // namespace

Eigen::MatrixXd forward_batch(const Network& net, const ShadowState* shadow,
                              const TrainConfig& cfg, const Eigen::MatrixXd& input,
                              ForwardRecord* record) {
    if (input.cols() != net.layer_dims().front())
        throw ConfigError("forward: input width does not match the input layer");
    const bool aware = cfg.mode == TrainMode::Aware;
    if (aware) check_shadow(net, shadow);

    if (record) {
        record->input = input;
        record->preact.clear();
        record->act.clear();
        record->tile_out.assign(net.layer_count(), {});
    }

    Eigen::MatrixXd a = input;
    for (size_t l = 0; l < net.layer_count(); ++l) {
        Eigen::MatrixXd z;
        if (aware) {
            z = aware_layer_forward(shadow->layers[l], a,
                                    record ? &record->tile_out[l] : nullptr);
        } else {
            z = a * net.master_weights()[l];
        }
        a = sigmoid_matrix(z);
        if (record) {
            record->preact.push_back(std::move(z));
            record->act.push_back(a);
        }
    }
    return a;
}

Gradients backward_batch(const Network& net, const ShadowState* shadow,
                         const TrainConfig& cfg, const ForwardRecord& record,
                         const Eigen::MatrixXd& targets) {
    const size_t layers = net.layer_count();
    if (record.act.size() != layers || record.preact.size() != layers)
        throw ConfigError("backward: record does not match a forward pass of this network");
    if (targets.rows() != record.input.rows() ||
        targets.cols() != net.layer_dims().back())
        throw ConfigError("backward: target shape mismatch");
    const bool aware = cfg.mode == TrainMode::Aware;
    if (aware) check_shadow(net, shadow);

    Gradients grads;
    grads.weights.resize(layers);
    if (aware) {
        grads.g_pos.resize(layers);
        grads.g_neg.resize(layers);
    }

    // Output delta for the half-SSE loss through the sigmoid.
    Eigen::MatrixXd dz =
        ((record.act.back() - targets).array() * record.act.back().array() *
         (1.0 - record.act.back().array()))
            .matrix();

    for (size_t l = layers; l-- > 0;) {
        const Eigen::MatrixXd& a_in = (l == 0) ? record.input : record.act[l - 1];
        Eigen::MatrixXd da;
        if (aware) {
            const LayerShadow& ls = shadow->layers[l];
            AwareLayerGrads lg =
                aware_layer_backward(ls, a_in, record.tile_out[l], cfg.nonideal, dz);
            grads.weights[l] = master_gradient(net.master_weights()[l], ls,
                                               cfg.quantize_weights, lg.g_pos, lg.g_neg);
            grads.g_pos[l] = std::move(lg.g_pos);
            grads.g_neg[l] = std::move(lg.g_neg);
            da = std::move(lg.input);
        } else {
            grads.weights[l] = a_in.transpose() * dz;
            da = dz * net.master_weights()[l].transpose();
        }
        if (l > 0)
            dz = (da.array() * record.act[l - 1].array() *
                  (1.0 - record.act[l - 1].array()))
                     .matrix();
    }
    return grads;
}

ForwardRecord forward_pass(const Network& net, const Eigen::VectorXd& x,
                           const TrainConfig& cfg) {
    ForwardRecord record;
    std::optional<ShadowState> shadow;
    if (cfg.mode == TrainMode::Aware) shadow = build_shadow(net.master_weights(), cfg);
    forward_batch(net, shadow ? &*shadow : nullptr, cfg, x.transpose(), &record);
    return record;
}

Gradients backward_pass(const Network& net, const ShadowState* shadow,
                        const TrainConfig& cfg, const ForwardRecord& record,
                        const Eigen::VectorXd& y) {
    std::optional<ShadowState> local;
    if (cfg.mode == TrainMode::Aware && !shadow) {
        local = build_shadow(net.master_weights(), cfg);
        shadow = &*local;
    }
    return backward_batch(net, shadow, cfg, record, y.transpose());
}

namespace {

void gather(const Dataset& ds, const std::vector<Eigen::Index>& idx, Eigen::Index out_dim,
            Eigen::MatrixXd& a, Eigen::MatrixXd& y, std::vector<int>& labels) {
    a.resize(static_cast<Eigen::Index>(idx.size()), ds.images.cols());
    y = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(idx.size()), out_dim);
    labels.resize(idx.size());
    for (size_t r = 0; r < idx.size(); ++r) {
        a.row(static_cast<Eigen::Index>(r)) = ds.images.row(idx[r]);
        const int label = ds.labels[static_cast<size_t>(idx[r])];
        if (label < 0 || label >= out_dim)
            throw ConfigError("label " + std::to_string(label) +
                              " does not fit the output layer");
        y(static_cast<Eigen::Index>(r), label) = 1.0;
        labels[r] = label;
    }
}

Eigen::Index argmax_row(const Eigen::MatrixXd& m, Eigen::Index row) {
    Eigen::Index best = 0;
    m.row(row).maxCoeff(&best);
    return best;
}

}  // namespace

TrainHistory train(Network& net, const Dataset& train_ds, const Dataset& test_ds,
                   const TrainConfig& cfg,
                   const std::function<void(const EpochStats&)>& on_epoch) {
    cfg.validate(net.layer_count());
    if (train_ds.empty()) throw ConfigError("train: empty training set");
    if (train_ds.images.cols() != net.layer_dims().front())
        throw ConfigError("train: image width does not match the input layer");
    const bool aware = cfg.mode == TrainMode::Aware;

    TrainHistory history;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = cfg.learning_rate * std::pow(cfg.lr_decay, epoch);
        double loss_sum = 0.0;
        Eigen::Index correct = 0;

        Eigen::MatrixXd a, y;
        std::vector<int> labels;
        ShadowState shadow;
        for (const auto& batch : batches(train_ds, cfg.batch_size,
                                         epoch_seed(cfg.seed, epoch))) {
            if (aware) shadow = build_shadow(net.master_weights(), cfg);
            gather(train_ds, batch, net.layer_dims().back(), a, y, labels);

            ForwardRecord record;
            const Eigen::MatrixXd out =
                forward_batch(net, aware ? &shadow : nullptr, cfg, a, &record);

            const double batch_loss = 0.5 * (out - y).squaredNorm();
            if (!std::isfinite(batch_loss))
                throw NumericError("training diverged: non-finite loss at epoch " +
                                   std::to_string(epoch));
            loss_sum += batch_loss;
            for (Eigen::Index r = 0; r < out.rows(); ++r)
                if (argmax_row(out, r) == labels[static_cast<size_t>(r)]) ++correct;

            const Gradients grads =
                backward_batch(net, aware ? &shadow : nullptr, cfg, record, y);
            const double step = lr / static_cast<double>(batch.size());
            for (size_t l = 0; l < net.layer_count(); ++l)
                net.master_weights()[l].noalias() -= step * grads.weights[l];
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.loss = loss_sum / static_cast<double>(train_ds.count());
        stats.train_accuracy =
            100.0 * static_cast<double>(correct) / static_cast<double>(train_ds.count());
        stats.test_accuracy = test_ds.empty() ? 0.0 : evaluate(net, test_ds, cfg);
        history.push_back(stats);
        if (on_epoch) on_epoch(stats);
    }
    return history;
}

double evaluate(const Network& net, const Dataset& ds, const TrainConfig& cfg) {
    if (ds.empty()) throw ConfigError("evaluate: empty dataset");
    if (ds.images.cols() != net.layer_dims().front())
        throw ConfigError("evaluate: image width does not match the input layer");
    cfg.validate(net.layer_count());

    std::optional<ShadowState> shadow;
    if (cfg.mode == TrainMode::Aware) shadow = build_shadow(net.master_weights(), cfg);

    const Eigen::Index chunk = 2048;
    Eigen::Index correct = 0;
    for (Eigen::Index start = 0; start < ds.count(); start += chunk) {
        const Eigen::Index n = std::min(chunk, ds.count() - start);
        const Eigen::MatrixXd out = forward_batch(
            net, shadow ? &*shadow : nullptr, cfg, ds.images.middleRows(start, n));
        for (Eigen::Index r = 0; r < n; ++r)
            if (argmax_row(out, r) == ds.labels[static_cast<size_t>(start + r)]) ++correct;
    }
    return 100.0 * static_cast<double>(correct) / static_cast<double>(ds.count());
}

namespace {

void put_u32(std::ostream& out, uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& out, uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ostream& out, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    put_u64(out, bits);
}

uint32_t get_u32(std::istream& in, const std::string& path) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw ConfigError(path + ": truncated checkpoint");
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= uint32_t(b[i]) << (8 * i);
    return v;
}

uint64_t get_u64(std::istream& in, const std::string& path) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) throw ConfigError(path + ": truncated checkpoint");
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= uint64_t(b[i]) << (8 * i);
    return v;
}

double get_f64(std::istream& in, const std::string& path) {
    const uint64_t bits = get_u64(in, path);
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const Network& net, const TrainConfig& cfg) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write checkpoint: " + path);
    out.write(kCheckpointMagic, 4);
    put_u32(out, kCheckpointVersion);

    put_u32(out, static_cast<uint32_t>(net.layer_dims().size()));
    for (auto d : net.layer_dims()) put_u64(out, static_cast<uint64_t>(d));
    for (const auto& w : net.master_weights())
        for (Eigen::Index i = 0; i < w.rows(); ++i)
            for (Eigen::Index j = 0; j < w.cols(); ++j) put_f64(out, w(i, j));

    for (const auto& w : net.master_weights()) {
        const double scale =
            cfg.quantize_weights ? quantize(w, cfg.clip_percentile).scale : 1.0;
        put_f64(out, scale);
    }

    put_u32(out, cfg.mode == TrainMode::Aware ? 1 : 0);
    put_u32(out, static_cast<uint32_t>(cfg.epochs));
    put_u64(out, static_cast<uint64_t>(cfg.batch_size));
    put_f64(out, cfg.learning_rate);
    put_f64(out, cfg.lr_decay);
    put_u64(out, cfg.seed);
    put_f64(out, cfg.nonideal.rs_ratio);
    put_f64(out, cfg.nonideal.rneu_ratio);
    put_u32(out, static_cast<uint32_t>(cfg.nonideal.k_sigma + 2));
    put_f64(out, cfg.nonideal.sigma_unit);
    put_u32(out, cfg.tiling ? static_cast<uint32_t>(cfg.tiling->size()) : 0);
    if (cfg.tiling)
        for (auto [m, n] : *cfg.tiling) {
            put_u64(out, static_cast<uint64_t>(m));
            put_u64(out, static_cast<uint64_t>(n));
        }
    put_f64(out, cfg.clip_percentile);
    put_u32(out, cfg.quantize_weights ? 1 : 0);
    if (!out) throw ConfigError("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open checkpoint: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kCheckpointMagic, 4) != 0)
        throw ConfigError(path + ": not a checkpoint file");
    if (get_u32(in, path) != kCheckpointVersion)
        throw ConfigError(path + ": unsupported checkpoint version");

    Checkpoint ck;
    const uint32_t n_dims = get_u32(in, path);
    if (n_dims < 2 || n_dims > 64) throw ConfigError(path + ": corrupt layer count");
    for (uint32_t i = 0; i < n_dims; ++i)
        ck.layer_dims.push_back(static_cast<Eigen::Index>(get_u64(in, path)));
    for (uint32_t l = 0; l + 1 < n_dims; ++l) {
        Eigen::MatrixXd w(ck.layer_dims[l], ck.layer_dims[l + 1]);
        for (Eigen::Index i = 0; i < w.rows(); ++i)
            for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = get_f64(in, path);
        ck.weights.push_back(std::move(w));
    }
    for (uint32_t l = 0; l + 1 < n_dims; ++l) ck.scales.push_back(get_f64(in, path));

    ck.cfg.mode = get_u32(in, path) == 1 ? TrainMode::Aware : TrainMode::Ideal;
    ck.cfg.epochs = static_cast<int>(get_u32(in, path));
    ck.cfg.batch_size = static_cast<Eigen::Index>(get_u64(in, path));
    ck.cfg.learning_rate = get_f64(in, path);
    ck.cfg.lr_decay = get_f64(in, path);
    ck.cfg.seed = get_u64(in, path);
    ck.cfg.nonideal.rs_ratio = get_f64(in, path);
    ck.cfg.nonideal.rneu_ratio = get_f64(in, path);
    ck.cfg.nonideal.k_sigma = static_cast<int>(get_u32(in, path)) - 2;
    ck.cfg.nonideal.sigma_unit = get_f64(in, path);
    const uint32_t n_tiles = get_u32(in, path);
    if (n_tiles > 0) {
        TileSpec tiles;
        for (uint32_t t = 0; t < n_tiles; ++t) {
            const auto m = static_cast<Eigen::Index>(get_u64(in, path));
            const auto n = static_cast<Eigen::Index>(get_u64(in, path));
            tiles.emplace_back(m, n);
        }
        ck.cfg.tiling = std::move(tiles);
    }
    ck.cfg.clip_percentile = get_f64(in, path);
    ck.cfg.quantize_weights = get_u32(in, path) == 1;
    return ck;
}

}  // namespace xbarnn
