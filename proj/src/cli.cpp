#include "xbarnn/cli.hpp"

#include "xbarnn/errors.hpp"
#include "xbarnn/oracle.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace xbarnn {

namespace {

// Fixed corpus seeds so the fallback dataset is the same for every run.
constexpr uint64_t kSynthTrainSeed = 0x5eed0001;
constexpr uint64_t kSynthTestSeed = 0x5eed0002;
constexpr Eigen::Index kSynthTrainCount = 60000;
constexpr Eigen::Index kSynthTestCount = 10000;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& v, const std::string& key) {
    try {
        size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': not a number: '" + v + "'");
    }
}

long long to_int(const std::string& v, const std::string& key) {
    try {
        size_t pos = 0;
        const long long i = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return i;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': not an integer: '" + v + "'");
    }
}

bool to_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config key '" + key + "': expected a boolean, got '" + v + "'");
}

std::vector<std::string> split_on(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, sep)) {
        item = trim(item);
        if (!item.empty()) parts.push_back(item);
    }
    return parts;
}

std::string mode_name(TrainMode mode) {
    return mode == TrainMode::Aware ? "aware" : "ideal";
}

json config_json(const AppConfig& cfg) {
    json j;
    j["technology"] = {{"name", cfg.tech.name},   {"r_on_ohm", cfg.tech.r_on},
                       {"r_off_ohm", cfg.tech.r_off}, {"r_low_ohm", cfg.tech.r_low},
                       {"r_high_ohm", cfg.tech.r_high}, {"alpha", cfg.tech.alpha}};
    j["nonideal"] = {{"rs_ratio", cfg.train.nonideal.rs_ratio},
                     {"rneu_ratio", cfg.train.nonideal.rneu_ratio},
                     {"k_sigma", cfg.train.nonideal.k_sigma},
                     {"sigma_unit", cfg.train.nonideal.sigma_unit}};
    j["train"] = {{"mode", mode_name(cfg.train.mode)},
                  {"epochs", cfg.train.epochs},
                  {"batch_size", cfg.train.batch_size},
                  {"learning_rate", cfg.train.learning_rate},
                  {"lr_decay", cfg.train.lr_decay},
                  {"seed", cfg.train.seed},
                  {"clip_percentile", cfg.train.clip_percentile},
                  {"quantize", cfg.train.quantize_weights},
                  {"tiles", cfg.train.tiling ? tiles_to_string(*cfg.train.tiling) : ""}};
    j["layers"] = cfg.layer_dims;
    j["datasets"] = {{"train_images", cfg.train_images.empty() ? "synthetic" : cfg.train_images},
                     {"train_labels", cfg.train_labels.empty() ? "synthetic" : cfg.train_labels},
                     {"test_images", cfg.test_images.empty() ? "synthetic" : cfg.test_images},
                     {"test_labels", cfg.test_labels.empty() ? "synthetic" : cfg.test_labels}};
    return j;
}

void write_manifest(const std::string& out_dir, const std::string& command,
                    const AppConfig& cfg, const json& extra) {
    json j;
    j["command"] = command;
    j["build_id"] = build_id();
    j["seed"] = cfg.train.seed;
    j["config"] = config_json(cfg);
    // Runs are single-threaded and fully seeded, so reruns reproduce
    // results exactly.
    j["run_to_run_tolerance"] = 0.0;
    j["results"] = extra;
    std::ofstream out(fs::path(out_dir) / ("manifest-" + command + ".json"));
    out << j.dump(2) << "\n";
}

void ensure_dir(const std::string& out_dir) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + out_dir);
}

Network checkpoint_network(const Checkpoint& ck) {
    return Network::from_weights(ck.weights);
}

}  // namespace

std::vector<std::string> config_keys() {
    return {
        "technology.name",     "technology.r_low_ohm", "technology.r_high_ohm",
        "nonideal.rs_ratio",   "nonideal.rneu_ratio",  "nonideal.k_sigma",
        "nonideal.sigma_unit", "train.mode",           "train.epochs",
        "train.batch_size",    "train.learning_rate",  "train.lr_decay",
        "train.seed",          "train.clip_percentile", "train.quantize", "train.tiles",
        "train.layers",        "data.train_images",    "data.train_labels",
        "data.test_images",    "data.test_labels",
    };
}

void apply_config_key(AppConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "technology.name") {
        cfg.tech = make_profile(value);
    } else if (key == "technology.r_low_ohm" || key == "technology.r_high_ohm") {
        // The used range keeps a fixed 15:1 ratio, so either bound fixes
        // the other. The device range brackets it with margin.
        const double v = to_double(value, key);
        const double r_low = key == "technology.r_low_ohm" ? v : v / kLevels;
        cfg.tech = make_custom_profile("custom", r_low / 4.0, r_low * kLevels * 4.0,
                                       r_low, r_low * kLevels);
    } else if (key == "nonideal.rs_ratio") {
        cfg.train.nonideal.rs_ratio = to_double(value, key);
    } else if (key == "nonideal.rneu_ratio") {
        cfg.train.nonideal.rneu_ratio = to_double(value, key);
    } else if (key == "nonideal.k_sigma") {
        cfg.train.nonideal.k_sigma = static_cast<int>(to_int(value, key));
    } else if (key == "nonideal.sigma_unit") {
        cfg.train.nonideal.sigma_unit = to_double(value, key);
    } else if (key == "train.mode") {
        if (value == "ideal") cfg.train.mode = TrainMode::Ideal;
        else if (value == "aware") cfg.train.mode = TrainMode::Aware;
        else throw ConfigError("train.mode must be 'ideal' or 'aware', got '" + value + "'");
    } else if (key == "train.epochs") {
        cfg.train.epochs = static_cast<int>(to_int(value, key));
    } else if (key == "train.batch_size") {
        cfg.train.batch_size = static_cast<Eigen::Index>(to_int(value, key));
    } else if (key == "train.learning_rate") {
        cfg.train.learning_rate = to_double(value, key);
    } else if (key == "train.lr_decay") {
        cfg.train.lr_decay = to_double(value, key);
    } else if (key == "train.seed") {
        cfg.train.seed = static_cast<uint64_t>(to_int(value, key));
    } else if (key == "train.clip_percentile") {
        cfg.train.clip_percentile = to_double(value, key);
    } else if (key == "train.quantize") {
        cfg.train.quantize_weights = to_bool(value, key);
    } else if (key == "train.tiles") {
        if (value.empty()) cfg.train.tiling.reset();
        else cfg.train.tiling = parse_tiles(value);
    } else if (key == "train.layers") {
        cfg.layer_dims.clear();
        for (int d : parse_int_list(value)) cfg.layer_dims.push_back(d);
        if (cfg.layer_dims.size() < 2)
            throw ConfigError("train.layers needs at least two dims");
    } else if (key == "data.train_images") {
        cfg.train_images = value;
    } else if (key == "data.train_labels") {
        cfg.train_labels = value;
    } else if (key == "data.test_images") {
        cfg.test_images = value;
    } else if (key == "data.test_labels") {
        cfg.test_labels = value;
    } else {
        std::ostringstream msg;
        msg << "unknown config key '" << key << "'. Valid keys:";
        for (const auto& k : config_keys()) msg << "\n  " << k;
        throw ConfigError(msg.str());
    }
}

AppConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    AppConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) +
                              ": expected 'key = value'");
        apply_config_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    for (const auto& item : split_on(text, ',')) out.push_back(to_double(item, "list"));
    return out;
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    for (const auto& item : split_on(text, ','))
        out.push_back(static_cast<int>(to_int(item, "list")));
    return out;
}

TileSpec parse_tiles(const std::string& text) {
    TileSpec tiles;
    for (const auto& item : split_on(text, ',')) {
        const auto x = item.find('x');
        if (x == std::string::npos)
            throw ConfigError("tile spec '" + item + "' must look like 112x100");
        tiles.emplace_back(to_int(item.substr(0, x), "tiles"),
                           to_int(item.substr(x + 1), "tiles"));
    }
    if (tiles.empty()) throw ConfigError("empty tile spec");
    return tiles;
}

std::vector<TileSpec> parse_tile_grids(const std::string& text) {
    std::vector<TileSpec> grids;
    for (const auto& item : split_on(text, ';')) {
        if (item == "full" || item == "untiled") grids.emplace_back();
        else grids.push_back(parse_tiles(item));
    }
    return grids;
}

std::string tiles_to_string(const TileSpec& tiles) {
    if (tiles.empty()) return "full";
    std::ostringstream os;
    for (size_t i = 0; i < tiles.size(); ++i) {
        if (i > 0) os << "+";
        os << tiles[i].first << "x" << tiles[i].second;
    }
    return os.str();
}

Dataset load_split(const AppConfig& cfg, Split split) {
    const bool is_train = split == Split::Train;
    const std::string& images = is_train ? cfg.train_images : cfg.test_images;
    const std::string& labels = is_train ? cfg.train_labels : cfg.test_labels;
    if (images.empty() != labels.empty())
        throw ConfigError("dataset needs both an image and a label path");
    if (!images.empty()) return load_dataset(images, labels, split);
    // No files configured: deterministic synthetic digit corpus.
    return synthesize_digits(is_train ? kSynthTrainCount : kSynthTestCount,
                             is_train ? kSynthTrainSeed : kSynthTestSeed, split);
}

void SweepSpec::validate() const {
    if (rs_ratios.empty() || rneu_ratios.empty() || k_sigmas.empty())
        throw ConfigError("sweep: rs_ratios, rneu_ratios and k_sigmas must be non-empty");
    if (tile_grids.empty()) throw ConfigError("sweep: tile_grids must be non-empty");
    if (modes.empty()) throw ConfigError("sweep: at least one mode required");
    if (repetitions < 1) throw ConfigError("sweep: repetitions must be >= 1");
}

std::string build_id() {
#ifdef XBARNN_BUILD_ID
    return XBARNN_BUILD_ID;
#else
    return "unknown";
#endif
}

void run_train(const AppConfig& cfg, const std::string& out_dir,
               const std::string& init_from) {
    ensure_dir(out_dir);
    const Dataset train_ds = load_split(cfg, Split::Train);
    const Dataset test_ds = load_split(cfg, Split::Test);

    Network net = init_from.empty()
                      ? Network(cfg.layer_dims, cfg.train.seed)
                      : Network::from_weights(load_checkpoint(init_from).weights);
    if (net.layer_dims() != cfg.layer_dims)
        throw ConfigError("init checkpoint layer dims do not match the configured network");
    std::ofstream hist(fs::path(out_dir) / "history.csv");
    hist << "epoch,loss,train_accuracy,test_accuracy\n";
    const TrainHistory history =
        train(net, train_ds, test_ds, cfg.train, [&](const EpochStats& s) {
            hist << s.epoch << "," << s.loss << "," << s.train_accuracy << ","
                 << s.test_accuracy << "\n";
            hist.flush();
            std::cout << "epoch " << s.epoch << "  loss " << s.loss << "  train "
                      << s.train_accuracy << "%  test " << s.test_accuracy << "%\n";
        });

    const std::string ck_path = (fs::path(out_dir) / "checkpoint.xbnn").string();
    save_checkpoint(ck_path, net, cfg.train);

    json extra;
    extra["checkpoint"] = ck_path;
    extra["epochs_run"] = history.size();
    if (!history.empty()) extra["final_test_accuracy"] = history.back().test_accuracy;
    write_manifest(out_dir, "train", cfg, extra);
    if (!history.empty())
        std::cout << "final test accuracy: " << history.back().test_accuracy << "%\n";
}

void run_evaluate(const AppConfig& cfg, const std::string& checkpoint_path,
                  const std::string& baseline_path, const std::string& out_dir) {
    ensure_dir(out_dir);
    const Checkpoint ck = load_checkpoint(checkpoint_path);
    const Network net = checkpoint_network(ck);
    const Dataset test_ds = load_split(cfg, Split::Test);

    TrainConfig eval_cfg = cfg.train;
    const double accuracy = evaluate(net, test_ds, eval_cfg);
    std::cout << "accuracy: " << accuracy << "% (" << mode_name(eval_cfg.mode)
              << " evaluation)\n";

    json extra;
    extra["checkpoint"] = checkpoint_path;
    extra["accuracy"] = accuracy;
    if (!baseline_path.empty()) {
        const Checkpoint base = load_checkpoint(baseline_path);
        const Network base_net = checkpoint_network(base);
        TrainConfig ideal_cfg = cfg.train;
        ideal_cfg.mode = TrainMode::Ideal;
        const double ideal_acc = evaluate(base_net, test_ds, ideal_cfg);
        std::cout << "ideal baseline: " << ideal_acc << "%  degradation: "
                  << ideal_acc - accuracy << " points\n";
        extra["ideal_accuracy"] = ideal_acc;
        extra["degradation"] = ideal_acc - accuracy;
    }
    write_manifest(out_dir, "evaluate", cfg, extra);
}

void run_sweep(const AppConfig& cfg, const SweepSpec& spec, const std::string& out_dir) {
    spec.validate();
    ensure_dir(out_dir);
    const Dataset train_ds = load_split(cfg, Split::Train);
    const Dataset test_ds = load_split(cfg, Split::Test);

    std::ofstream rows(fs::path(out_dir) / "sweep.csv");
    rows << "mode,rep,seed,rs_ratio,rneu_ratio,k_sigma,sigma_unit,tiles,m,n,"
            "accuracy,ideal_accuracy,degradation,build_id\n";

    std::map<std::string, std::vector<double>> cell_acc, cell_deg;
    std::vector<std::string> cell_order;

    for (int rep = 0; rep < spec.repetitions; ++rep) {
        const uint64_t seed = cfg.train.seed + static_cast<uint64_t>(rep);

        // Same-seed ideal baseline for this repetition.
        TrainConfig ideal_train = cfg.train;
        ideal_train.mode = TrainMode::Ideal;
        ideal_train.seed = seed;
        ideal_train.tiling.reset();
        Network baseline(cfg.layer_dims, seed);
        train(baseline, train_ds, test_ds, ideal_train);
        TrainConfig ideal_eval = ideal_train;
        const double ideal_acc = evaluate(baseline, test_ds, ideal_eval);

        for (TrainMode mode : spec.modes) {
            for (const TileSpec& tiles : spec.tile_grids) {
                for (double rs : spec.rs_ratios) {
                    for (double rneu : spec.rneu_ratios) {
                        for (int k : spec.k_sigmas) {
                            TrainConfig cell = cfg.train;
                            cell.seed = seed;
                            cell.mode = TrainMode::Aware;
                            cell.nonideal.rs_ratio = rs;
                            cell.nonideal.rneu_ratio = rneu;
                            cell.nonideal.k_sigma = k;
                            if (tiles.empty()) cell.tiling.reset();
                            else cell.tiling = tiles;

                            double accuracy = 0.0;
                            if (mode == TrainMode::Ideal) {
                                accuracy = evaluate(baseline, test_ds, cell);
                            } else {
                                TrainConfig aware_train = cell;
                                if (spec.protocol == AwareProtocol::Nominal)
                                    aware_train.nonideal.k_sigma = 0;
                                // Fine-tune the same-seed ideal baseline.
                                Network net = Network::from_weights(
                                    baseline.master_weights());
                                train(net, train_ds, test_ds, aware_train);
                                accuracy = evaluate(net, test_ds, cell);
                            }
                            const double degradation = ideal_acc - accuracy;

                            const auto [m, n] =
                                tiles.empty()
                                    ? std::pair<Eigen::Index, Eigen::Index>(
                                          cfg.layer_dims[0], cfg.layer_dims[1])
                                    : tiles.front();
                            rows << mode_name(mode) << "," << rep << "," << seed << ","
                                 << rs << "," << rneu << "," << k << ","
                                 << cell.nonideal.sigma_unit << ","
                                 << tiles_to_string(tiles) << "," << m << "," << n << ","
                                 << accuracy << "," << ideal_acc << "," << degradation
                                 << "," << build_id() << "\n";
                            rows.flush();

                            std::ostringstream key;
                            key << mode_name(mode) << "," << rs << "," << rneu << ","
                                << k << "," << tiles_to_string(tiles);
                            if (!cell_acc.count(key.str())) cell_order.push_back(key.str());
                            cell_acc[key.str()].push_back(accuracy);
                            cell_deg[key.str()].push_back(degradation);
                        }
                    }
                }
            }
        }
    }

    std::ofstream summary(fs::path(out_dir) / "sweep_summary.csv");
    summary << "mode,rs_ratio,rneu_ratio,k_sigma,tiles,reps,mean_accuracy,"
               "spread_accuracy,mean_degradation,spread_degradation\n";
    for (const auto& key : cell_order) {
        const auto& accs = cell_acc[key];
        const auto& degs = cell_deg[key];
        auto mean = [](const std::vector<double>& v) {
            double s = 0;
            for (double x : v) s += x;
            return s / static_cast<double>(v.size());
        };
        auto spread = [](const std::vector<double>& v) {
            return *std::max_element(v.begin(), v.end()) -
                   *std::min_element(v.begin(), v.end());
        };
        summary << key << "," << accs.size() << "," << mean(accs) << "," << spread(accs)
                << "," << mean(degs) << "," << spread(degs) << "\n";
    }

    write_manifest(out_dir, "sweep", cfg,
                   json{{"rows", (fs::path(out_dir) / "sweep.csv").string()},
                        {"summary", (fs::path(out_dir) / "sweep_summary.csv").string()},
                        {"repetitions", spec.repetitions}});
}

void run_validate(const AppConfig& cfg, const std::string& checkpoint_path, int n_images,
                  const std::vector<double>& rs_ratios,
                  const std::vector<double>& rneu_ratios, const std::string& out_dir) {
    ensure_dir(out_dir);
    if (n_images < 1) throw ConfigError("validate: n_images must be >= 1");
    const Checkpoint ck = load_checkpoint(checkpoint_path);
    const Dataset test_ds = load_split(cfg, Split::Test);
    if (test_ds.count() < n_images)
        throw ConfigError("validate: dataset has fewer than n_images items");

    // First layer crossbar programmed from the checkpoint weights.
    const Eigen::MatrixXd& w0 = ck.weights.front();
    const QuantizedWeights q = cfg.train.quantize_weights
                                   ? quantize(w0, cfg.train.clip_percentile)
                                   : passthrough_weights(w0);

    std::ofstream grid_csv(fs::path(out_dir) / "validate.csv");
    grid_csv << "rs_ratio,rneu_ratio,k_sigma,n_images,nrmsd,build_id\n";
    std::ofstream cur_csv(fs::path(out_dir) / "currents.csv");
    cur_csv << "rs_ratio,rneu_ratio,neuron,model_mean,oracle_mean\n";

    double worst = 0.0;
    for (double rs : rs_ratios) {
        for (double rneu : rneu_ratios) {
            NonIdealityConfig corner = cfg.train.nonideal;
            corner.rs_ratio = rs;
            corner.rneu_ratio = rneu;
            const SplitConductance split = apply_variation(split_signed(q), corner);
            const DegradationFactors factors = degradation_factors(split, corner);
            const CrossbarOracle oracle(split, corner);

            Eigen::VectorXd model_mean = Eigen::VectorXd::Zero(split.cols());
            Eigen::VectorXd oracle_mean = Eigen::VectorXd::Zero(split.cols());
            for (int i = 0; i < n_images; ++i) {
                const Eigen::VectorXd a = test_ds.images.row(i).transpose();
                model_mean += forward(split, factors, a);
                oracle_mean += oracle.currents(a);
            }
            model_mean /= n_images;
            oracle_mean /= n_images;

            const double dev = nrmsd(model_mean, oracle_mean);
            worst = std::max(worst, dev);
            grid_csv << rs << "," << rneu << "," << corner.k_sigma << "," << n_images
                     << "," << dev << "," << build_id() << "\n";
            for (Eigen::Index j = 0; j < model_mean.size(); ++j)
                cur_csv << rs << "," << rneu << "," << j << "," << model_mean(j) << ","
                        << oracle_mean(j) << "\n";
            std::cout << "rs " << rs << "  rneu " << rneu << "  nrmsd " << dev << "\n";
        }
    }

    write_manifest(out_dir, "validate", cfg,
                   json{{"checkpoint", checkpoint_path},
                        {"n_images", n_images},
                        {"worst_nrmsd", worst}});
}

void run_export_netlist(const AppConfig& cfg, const std::string& checkpoint_path,
                        size_t layer, Eigen::Index image_index,
                        const std::string& out_dir) {
    ensure_dir(out_dir);
    const Checkpoint ck = load_checkpoint(checkpoint_path);
    const Network net = checkpoint_network(ck);
    if (layer >= net.layer_count())
        throw ConfigError("export-netlist: layer index out of range");
    const Dataset test_ds = load_split(cfg, Split::Test);
    if (image_index < 0 || image_index >= test_ds.count())
        throw ConfigError("export-netlist: image index out of range");

    TrainConfig fwd_cfg = cfg.train;
    fwd_cfg.mode = TrainMode::Aware;
    fwd_cfg.tiling.reset();
    const Eigen::VectorXd x = test_ds.images.row(image_index).transpose();
    Eigen::VectorXd input = x;
    if (layer > 0) {
        const ForwardRecord rec = forward_pass(net, x, fwd_cfg);
        input = rec.act[layer - 1].row(0).transpose();
    }

    const Eigen::MatrixXd& w = net.master_weights()[layer];
    const QuantizedWeights q = fwd_cfg.quantize_weights
                                   ? quantize(w, fwd_cfg.clip_percentile)
                                   : passthrough_weights(w);
    const SplitConductance split = apply_variation(split_signed(q), fwd_cfg.nonideal);

    const std::string path = (fs::path(out_dir) / "netlist.txt").string();
    std::ofstream out(path);
    write_netlist(out, split, fwd_cfg.nonideal, input, cfg.tech);
    std::cout << "netlist written to " << path << "\n";
    write_manifest(out_dir, "export-netlist", cfg,
                   json{{"netlist", path}, {"layer", layer}, {"image", image_index}});
}

void run_synth_data(Eigen::Index train_count, Eigen::Index test_count, uint64_t seed,
                    const std::string& out_dir) {
    ensure_dir(out_dir);
    const Dataset train_ds = synthesize_digits(train_count, seed, Split::Train);
    const Dataset test_ds = synthesize_digits(test_count, seed + 1, Split::Test);
    write_idx_images((fs::path(out_dir) / "train-images-idx3-ubyte").string(),
                     train_ds.images);
    write_idx_labels((fs::path(out_dir) / "train-labels-idx1-ubyte").string(),
                     train_ds.labels);
    write_idx_images((fs::path(out_dir) / "t10k-images-idx3-ubyte").string(),
                     test_ds.images);
    write_idx_labels((fs::path(out_dir) / "t10k-labels-idx1-ubyte").string(),
                     test_ds.labels);
    std::cout << "wrote " << train_count << " train / " << test_count
              << " test images to " << out_dir << "\n";
}

}  // namespace xbarnn
