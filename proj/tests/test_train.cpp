#include "xbarnn/train.hpp"

#include "xbarnn/errors.hpp"
#include "xbarnn/xbar.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

using namespace xbarnn;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, uint64_t seed,
                              double lo = -1.0, double hi = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
    return m;
}

Eigen::VectorXd random_vector(Eigen::Index n, uint64_t seed, double lo = 0.0,
                              double hi = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = dist(rng);
    return v;
}

// Straight-loop reimplementation of the non-ideal layer stack, independent
// of the batched engine. Scalar sums only.
Eigen::VectorXd naive_aware_forward(const std::vector<Eigen::MatrixXd>& weights,
                                    const TrainConfig& cfg, const Eigen::VectorXd& x) {
    const double r_s = cfg.nonideal.source_resistance();
    const double r_neu = cfg.nonideal.neuron_resistance();
    Eigen::VectorXd a = x;
    for (const auto& w : weights) {
        const QuantizedWeights q = cfg.quantize_weights
                                       ? quantize(w, cfg.clip_percentile)
                                       : passthrough_weights(w);
        const SplitConductance split = apply_variation(split_signed(q), cfg.nonideal);
        const Eigen::Index m = split.rows(), n = split.cols();
        Eigen::VectorXd z(n);
        for (Eigen::Index j = 0; j < n; ++j) {
            double num = 0.0, gamma = 1.0;
            for (Eigen::Index i = 0; i < m; ++i) {
                double load_pos = 0.0, load_neg = 0.0;
                for (Eigen::Index jj = 0; jj < n; ++jj) {
                    if (split.g_pos(i, jj) > 0.0)
                        load_pos += 1.0 / (1.0 / split.g_pos(i, jj) + r_neu);
                    if (split.g_neg(i, jj) > 0.0)
                        load_neg += 1.0 / (1.0 / split.g_neg(i, jj) + r_neu);
                }
                const double beta_pos = 1.0 / (1.0 + r_s * load_pos);
                const double beta_neg = 1.0 / (1.0 + r_s * load_neg);
                num += a(i) * beta_pos * split.g_pos(i, j) -
                       a(i) * beta_neg * split.g_neg(i, j);
            }
            for (Eigen::Index i = 0; i < m; ++i)
                gamma += r_neu * (split.g_pos(i, j) + split.g_neg(i, j));
            z(j) = q.scale * num / gamma;
        }
        a.resize(n);
        for (Eigen::Index j = 0; j < n; ++j) a(j) = sigmoid(z(j));
    }
    return a;
}

double composed_loss(const Network& net, const ShadowState& shadow, const TrainConfig& cfg,
                     const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    const Eigen::MatrixXd out = forward_batch(net, &shadow, cfg, x);
    return 0.5 * (out - y).squaredNorm();
}

// Central finite differences on the post-variation split conductances,
// re-deriving the degradation factors at every probe.
double max_gradcheck_error(const Network& net, const TrainConfig& cfg,
                           const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                           double step = 1e-6) {
    ShadowState shadow = build_shadow(net.master_weights(), cfg);
    ForwardRecord record;
    forward_batch(net, &shadow, cfg, x, &record);
    const Gradients grads = backward_batch(net, &shadow, cfg, record, y);

    double worst = 0.0;
    for (size_t l = 0; l < net.layer_count(); ++l) {
        for (int array = 0; array < 2; ++array) {
            for (Eigen::Index j = 0; j < shadow.layers[l].split.cols(); ++j) {
                for (Eigen::Index i = 0; i < shadow.layers[l].split.rows(); ++i) {
                    ShadowState probe = shadow;
                    Eigen::MatrixXd& g = array == 0 ? probe.layers[l].split.g_pos
                                                    : probe.layers[l].split.g_neg;
                    const double saved = g(i, j);
                    g(i, j) = saved + step;
                    rebuild_tiles(probe.layers[l], cfg, l);
                    const double up = composed_loss(net, probe, cfg, x, y);
                    g(i, j) = saved - step;
                    rebuild_tiles(probe.layers[l], cfg, l);
                    const double down = composed_loss(net, probe, cfg, x, y);
                    const double fd = (up - down) / (2.0 * step);
                    const double ana = array == 0 ? grads.g_pos[l](i, j)
                                                  : grads.g_neg[l](i, j);
                    const double denom = std::max({1.0, std::abs(fd), std::abs(ana)});
                    worst = std::max(worst, std::abs(fd - ana) / denom);
                }
            }
        }
    }
    return worst;
}

TrainConfig aware_cfg(double rs, double rneu, int k = 0) {
    TrainConfig cfg;
    cfg.mode = TrainMode::Aware;
    cfg.nonideal.rs_ratio = rs;
    cfg.nonideal.rneu_ratio = rneu;
    cfg.nonideal.k_sigma = k;
    return cfg;
}

Dataset toy_dataset(Eigen::Index count, Eigen::Index width, uint64_t seed) {
    Dataset ds;
    ds.images = random_matrix(count, width, seed, 0.0, 1.0);
    ds.labels.resize(static_cast<size_t>(count));
    std::mt19937_64 rng(seed + 1);
    std::uniform_int_distribution<int> dist(0, 9);
    for (auto& label : ds.labels) label = dist(rng);
    return ds;
}

}  // namespace

TEST_CASE("sigmoid values, derivative identity, and saturation") {
    CHECK(sigmoid(0.0) == 0.5);
    CHECK(sigmoid_deriv_from_output(sigmoid(0.0)) == 0.25);
    CHECK(sigmoid(std::log(3.0)) == doctest::Approx(0.75).epsilon(1e-14));
    for (double x : {-7.3, -0.9, 0.2, 3.1, 40.0})
        CHECK(sigmoid(-x) == doctest::Approx(1.0 - sigmoid(x)).epsilon(1e-12));
    CHECK(sigmoid(1000.0) == 1.0);
    CHECK(sigmoid(-1000.0) == 0.0);
}

TEST_CASE("half sum-of-squares loss") {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(10);
    y(3) = 1.0;
    CHECK(mse_loss(y, y) == 0.0);
    Eigen::VectorXd a = y;
    a(7) += 0.2;
    CHECK(mse_loss(a, y) == doctest::Approx(0.02).epsilon(1e-14));
    CHECK(mse_loss(random_vector(10, 1), y) >= 0.0);
    CHECK_THROWS_AS(mse_loss(random_vector(9, 2), y), ConfigError);
}

TEST_CASE("network construction and seeding") {
    const Network a({4, 3, 2}, 7);
    const Network b({4, 3, 2}, 7);
    const Network c({4, 3, 2}, 8);
    CHECK(a.master_weights()[0] == b.master_weights()[0]);
    CHECK(a.master_weights()[0] != c.master_weights()[0]);
    CHECK(a.layer_count() == 2);
    CHECK_THROWS_AS(Network({4}, 1), ConfigError);
    CHECK_THROWS_AS(Network({4, 0, 2}, 1), ConfigError);

    // Glorot-style bound.
    const double r = std::sqrt(6.0 / (4 + 3));
    CHECK(a.master_weights()[0].cwiseAbs().maxCoeff() <= r);
}

TEST_CASE("aware forward with zero corner and no quantization equals ideal bit for bit") {
    const Network net({6, 5, 10}, 11);
    const Eigen::MatrixXd x = random_matrix(4, 6, 12, 0.0, 1.0);

    TrainConfig ideal;
    ideal.mode = TrainMode::Ideal;
    const Eigen::MatrixXd out_ideal = forward_batch(net, nullptr, ideal, x);

    TrainConfig aware = aware_cfg(0.0, 0.0);
    aware.quantize_weights = false;
    const ShadowState shadow = build_shadow(net.master_weights(), aware);
    const Eigen::MatrixXd out_aware = forward_batch(net, &shadow, aware, x);

    CHECK(out_aware == out_ideal);
}

TEST_CASE("aware gradients with zero corner reproduce the ideal gradients") {
    const Network net({5, 4, 10}, 13);
    const Eigen::MatrixXd x = random_matrix(3, 5, 14, 0.0, 1.0);
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(3, 10);
    y(0, 2) = y(1, 7) = y(2, 0) = 1.0;

    TrainConfig ideal;
    ForwardRecord rec_ideal;
    forward_batch(net, nullptr, ideal, x, &rec_ideal);
    const Gradients g_ideal = backward_batch(net, nullptr, ideal, rec_ideal, y);

    TrainConfig aware = aware_cfg(0.0, 0.0);
    aware.quantize_weights = false;
    const ShadowState shadow = build_shadow(net.master_weights(), aware);
    ForwardRecord rec_aware;
    forward_batch(net, &shadow, aware, x, &rec_aware);
    const Gradients g_aware = backward_batch(net, &shadow, aware, rec_aware, y);

    for (size_t l = 0; l < net.layer_count(); ++l)
        CHECK(g_aware.weights[l] == g_ideal.weights[l]);
}

TEST_CASE("single 1x1 layer reproduces the series-circuit activation") {
    Network net = Network::from_weights({Eigen::MatrixXd::Constant(1, 1, 1.0)});
    // Normalized R_s = R_neu = 0.1; quantized weight stays at level 15/15.
    TrainConfig cfg = aware_cfg(0.1 / kLevels, 0.1 / kLevels);
    const ForwardRecord rec = forward_pass(net, Eigen::VectorXd::Ones(1), cfg);
    CHECK(rec.preact[0](0, 0) == doctest::Approx(1.0 / 1.2).epsilon(1e-12));
    CHECK(rec.act[0](0, 0) == doctest::Approx(sigmoid(1.0 / 1.2)).epsilon(1e-12));
}

TEST_CASE("batched engine matches the straight-loop reference") {
    const Network net({7, 5, 10}, 15);
    const TrainConfig cfg = aware_cfg(0.0027, 0.00067, -1);
    const ShadowState shadow = build_shadow(net.master_weights(), cfg);
    for (int it = 0; it < 3; ++it) {
        const Eigen::VectorXd x = random_vector(7, 16 + static_cast<uint64_t>(it));
        const Eigen::MatrixXd out =
            forward_batch(net, &shadow, cfg, x.transpose());
        const Eigen::VectorXd reference =
            naive_aware_forward(net.master_weights(), cfg, x);
        for (Eigen::Index j = 0; j < reference.size(); ++j)
            CHECK(out(0, j) == doctest::Approx(reference(j)).epsilon(1e-12));
    }
}

TEST_CASE("analytic conductance gradients match central finite differences") {
    // Toy 2x2x1-shaped network at the documented corner.
    {
        Network net({2, 2, 1}, 17);
        const TrainConfig cfg = aware_cfg(0.001, 0.0005);
        const Eigen::MatrixXd x = random_matrix(1, 2, 18, 0.0, 1.0);
        const Eigen::MatrixXd y = Eigen::MatrixXd::Constant(1, 1, 1.0);
        CHECK(max_gradcheck_error(net, cfg, x, y) < 1e-5);
    }
    // Deeper, with variation and quantization.
    {
        Network net({6, 5, 4, 10}, 19);
        TrainConfig cfg = aware_cfg(0.0027, 0.00067, -2);
        const Eigen::MatrixXd x = random_matrix(2, 6, 20, 0.0, 1.0);
        Eigen::MatrixXd y = Eigen::MatrixXd::Zero(2, 10);
        y(0, 1) = y(1, 8) = 1.0;
        CHECK(max_gradcheck_error(net, cfg, x, y) < 1e-5);
    }
    // Tiled layers.
    {
        Network net({6, 4, 10}, 21);
        TrainConfig cfg = aware_cfg(0.002, 0.0004);
        cfg.tiling = TileSpec{{2, 3}, {4, 5}};
        const Eigen::MatrixXd x = random_matrix(2, 6, 22, 0.0, 1.0);
        Eigen::MatrixXd y = Eigen::MatrixXd::Zero(2, 10);
        y(0, 0) = y(1, 3) = 1.0;
        CHECK(max_gradcheck_error(net, cfg, x, y) < 1e-5);
    }
}

TEST_CASE("gamma-path gradient matches the closed form on a single cell") {
    // R_s = 0 leaves z = scale * a g / (1 + R_neu g); differentiate by hand.
    const double g = 0.6, a_in = 0.8, r_neu = 0.3;
    Network net = Network::from_weights({Eigen::MatrixXd::Constant(1, 1, g)});
    TrainConfig cfg = aware_cfg(0.0, r_neu / kLevels);
    cfg.quantize_weights = false;

    const ShadowState shadow = build_shadow(net.master_weights(), cfg);
    ForwardRecord rec;
    forward_batch(net, &shadow, cfg, Eigen::MatrixXd::Constant(1, 1, a_in), &rec);
    const Eigen::MatrixXd y = Eigen::MatrixXd::Zero(1, 1);
    const Gradients grads = backward_batch(net, &shadow, cfg, rec, y);

    const double z = a_in * g / (1.0 + r_neu * g);
    const double dz_dg = a_in / ((1.0 + r_neu * g) * (1.0 + r_neu * g));
    const double out = sigmoid(z);
    const double dl_dg = (out - 0.0) * out * (1.0 - out) * dz_dg;
    CHECK(grads.g_pos[0](0, 0) == doctest::Approx(dl_dg).epsilon(1e-12));
}

TEST_CASE("training is deterministic and reducible") {
    const Dataset train_ds = toy_dataset(60, 12, 23);
    const Dataset test_ds = toy_dataset(20, 12, 24);

    TrainConfig cfg;
    cfg.mode = TrainMode::Ideal;
    cfg.epochs = 3;
    cfg.batch_size = 10;
    cfg.learning_rate = 0.5;
    cfg.seed = 5;

    Network a({12, 6, 10}, cfg.seed);
    Network b({12, 6, 10}, cfg.seed);
    const auto ha = train(a, train_ds, test_ds, cfg);
    const auto hb = train(b, train_ds, test_ds, cfg);
    REQUIRE(ha.size() == 3);
    for (size_t e = 0; e < ha.size(); ++e) {
        CHECK(ha[e].loss == hb[e].loss);
        CHECK(ha[e].test_accuracy == hb[e].test_accuracy);
    }
    CHECK(a.master_weights()[0] == b.master_weights()[0]);

    // Aware pipeline with no non-idealities and no quantization walks the
    // identical weight trajectory.
    TrainConfig reduced = cfg;
    reduced.mode = TrainMode::Aware;
    reduced.quantize_weights = false;
    Network c({12, 6, 10}, cfg.seed);
    const auto hc = train(c, train_ds, test_ds, reduced);
    for (size_t l = 0; l < a.layer_count(); ++l)
        CHECK((a.master_weights()[l] - c.master_weights()[l]).cwiseAbs().maxCoeff() <=
              1e-10);
    for (size_t e = 0; e < ha.size(); ++e) CHECK(ha[e].loss == hc[e].loss);
}

TEST_CASE("training aborts with a diagnostic when the loss goes non-finite") {
    Dataset train_ds = toy_dataset(40, 8, 25);
    train_ds.images(17, 3) = std::numeric_limits<double>::quiet_NaN();
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 40;
    cfg.learning_rate = 0.5;
    cfg.seed = 2;
    Network net({8, 6, 10}, cfg.seed);
    CHECK_THROWS_AS(train(net, train_ds, train_ds, cfg), NumericError);
}

TEST_CASE("evaluate scores a perfect predictor at 100 percent") {
    const Network net({9, 7, 10}, 26);
    Dataset ds = toy_dataset(50, 9, 27);
    TrainConfig cfg;
    // Relabel with the network's own predictions.
    const Eigen::MatrixXd out = forward_batch(net, nullptr, cfg, ds.images);
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
        Eigen::Index best = 0;
        out.row(r).maxCoeff(&best);
        ds.labels[static_cast<size_t>(r)] = static_cast<int>(best);
    }
    CHECK(evaluate(net, ds, cfg) == 100.0);

    Dataset empty;
    empty.images.resize(0, 9);
    CHECK_THROWS_AS(evaluate(net, empty, cfg), ConfigError);
}

TEST_CASE("checkpoints round-trip bit-exactly") {
    const auto dir = std::filesystem::temp_directory_path() / "xbarnn-train-tests";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "ck.xbnn").string();

    Network net({10, 6, 10}, 31);
    TrainConfig cfg = aware_cfg(0.0013, 0.00033, 1);
    cfg.epochs = 7;
    cfg.batch_size = 25;
    cfg.learning_rate = 0.75;
    cfg.lr_decay = 0.9;
    cfg.seed = 99;
    cfg.tiling = TileSpec{{5, 3}, {6, 10}};
    cfg.clip_percentile = 99.5;
    save_checkpoint(path, net, cfg);

    const Checkpoint ck = load_checkpoint(path);
    REQUIRE(ck.layer_dims == net.layer_dims());
    for (size_t l = 0; l < net.layer_count(); ++l)
        CHECK(ck.weights[l] == net.master_weights()[l]);
    CHECK(ck.scales.size() == 2);
    CHECK(ck.cfg.mode == TrainMode::Aware);
    CHECK(ck.cfg.epochs == 7);
    CHECK(ck.cfg.batch_size == 25);
    CHECK(ck.cfg.learning_rate == 0.75);
    CHECK(ck.cfg.lr_decay == 0.9);
    CHECK(ck.cfg.seed == 99);
    CHECK(ck.cfg.nonideal.rs_ratio == 0.0013);
    CHECK(ck.cfg.nonideal.k_sigma == 1);
    REQUIRE(ck.cfg.tiling.has_value());
    CHECK((*ck.cfg.tiling)[0] == std::pair<Eigen::Index, Eigen::Index>(5, 3));
    CHECK(ck.cfg.clip_percentile == 99.5);

    // Reloaded network evaluates identically.
    const Dataset ds = toy_dataset(30, 10, 32);
    const Network reloaded = Network::from_weights(ck.weights);
    CHECK(evaluate(reloaded, ds, cfg) == evaluate(net, ds, cfg));

    // Not a checkpoint.
    const auto junk = (dir / "junk.bin").string();
    std::ofstream(junk, std::ios::binary) << "not a checkpoint";
    CHECK_THROWS_AS(load_checkpoint(junk), ConfigError);
}

TEST_CASE("stale or missing shadow state is rejected in aware mode") {
    const Network net({5, 4, 10}, 33);
    const TrainConfig cfg = aware_cfg(0.001, 0.0002);
    const Eigen::MatrixXd x = random_matrix(2, 5, 34, 0.0, 1.0);
    CHECK_THROWS_AS(forward_batch(net, nullptr, cfg, x), ConfigError);

    const Network other({5, 6, 10}, 35);
    const ShadowState stale = build_shadow(other.master_weights(), cfg);
    CHECK_THROWS_AS(forward_batch(net, &stale, cfg, x), ConfigError);
}

TEST_CASE("forward and backward reject mismatched shapes") {
    const Network net({5, 4, 10}, 36);
    TrainConfig cfg;
    CHECK_THROWS_AS(forward_batch(net, nullptr, cfg, random_matrix(2, 6, 37)), ConfigError);

    ForwardRecord rec;
    forward_batch(net, nullptr, cfg, random_matrix(2, 5, 38, 0.0, 1.0), &rec);
    CHECK_THROWS_AS(backward_batch(net, nullptr, cfg, rec, random_matrix(2, 9, 39)),
                    ConfigError);
}
