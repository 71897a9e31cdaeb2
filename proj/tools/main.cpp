#include "xbarnn/cli.hpp"
#include "xbarnn/errors.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>

namespace {

struct GlobalArgs {
    std::string config_path;
    std::string out_dir = "out";
    long long seed = -1;
    std::string train_images, train_labels, test_images, test_labels;
};

void add_global_options(CLI::App& cmd, GlobalArgs& args) {
    cmd.add_option("--config", args.config_path, "key = value config file");
    cmd.add_option("--seed", args.seed, "override the configured seed");
    cmd.add_option("--out", args.out_dir, "output directory (default ./out)");
    cmd.add_option("--train-images", args.train_images, "IDX training image file");
    cmd.add_option("--train-labels", args.train_labels, "IDX training label file");
    cmd.add_option("--test-images", args.test_images, "IDX test image file");
    cmd.add_option("--test-labels", args.test_labels, "IDX test label file");
}

xbarnn::AppConfig resolve_config(const GlobalArgs& args) {
    xbarnn::AppConfig cfg;
    if (!args.config_path.empty()) cfg = xbarnn::parse_config_file(args.config_path);
    if (args.seed >= 0) cfg.train.seed = static_cast<uint64_t>(args.seed);
    if (!args.train_images.empty()) cfg.train_images = args.train_images;
    if (!args.train_labels.empty()) cfg.train_labels = args.train_labels;
    if (!args.test_images.empty()) cfg.test_images = args.test_images;
    if (!args.test_labels.empty()) cfg.test_labels = args.test_labels;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"non-ideal memristive crossbar simulator and trainer"};
    app.require_subcommand(1);

    GlobalArgs args;

    auto* train_cmd = app.add_subcommand("train", "train a network and write a checkpoint");
    add_global_options(*train_cmd, args);
    std::string train_mode;
    train_cmd->add_option("--mode", train_mode, "ideal or aware (overrides config)");
    std::string train_rs, train_rneu;
    train_cmd->add_option("--rs-ratio", train_rs, "source resistance ratio override");
    train_cmd->add_option("--rneu-ratio", train_rneu, "neuron resistance ratio override");
    std::string train_tiles;
    train_cmd->add_option("--tiles", train_tiles, "per-layer tiles, e.g. 112x100,100x10");
    long long train_ksigma = 99;
    train_cmd->add_option("--k-sigma", train_ksigma, "variation corner in [-2, 2]");
    std::string train_init;
    train_cmd->add_option("--init-from", train_init,
                          "checkpoint whose weights seed this run (fine-tuning)");

    auto* eval_cmd = app.add_subcommand("evaluate", "evaluate a checkpoint");
    add_global_options(*eval_cmd, args);
    std::string eval_checkpoint, eval_baseline, eval_mode;
    eval_cmd->add_option("--checkpoint", eval_checkpoint, "checkpoint to evaluate")
        ->required();
    eval_cmd->add_option("--baseline", eval_baseline,
                         "ideal baseline checkpoint for degradation");
    eval_cmd->add_option("--mode", eval_mode, "evaluation mode: ideal or aware");
    std::string eval_rs, eval_rneu, eval_tiles;
    long long eval_ksigma = 99;
    eval_cmd->add_option("--rs-ratio", eval_rs, "source resistance ratio");
    eval_cmd->add_option("--rneu-ratio", eval_rneu, "neuron resistance ratio");
    eval_cmd->add_option("--k-sigma", eval_ksigma, "variation corner in [-2, 2]");
    eval_cmd->add_option("--tiles", eval_tiles, "per-layer tiles, e.g. 112x100,100x10");

    auto* sweep_cmd = app.add_subcommand("sweep", "factorial non-ideality sweep");
    add_global_options(*sweep_cmd, args);
    std::string sw_rs = "0.00067,0.0013,0.0027", sw_rneu = "0,0.00033,0.00067";
    std::string sw_k = "0", sw_tiles = "full", sw_modes = "ideal,aware";
    std::string sw_protocol = "per-corner";
    int sw_reps = 3;
    sweep_cmd->add_option("--rs-ratios", sw_rs, "comma list of rs ratios");
    sweep_cmd->add_option("--rneu-ratios", sw_rneu, "comma list of rneu ratios");
    sweep_cmd->add_option("--k-sigmas", sw_k, "comma list of variation corners");
    sweep_cmd->add_option("--tile-grids", sw_tiles,
                          "semicolon list of tile specs, 'full' for untiled");
    sweep_cmd->add_option("--modes", sw_modes, "ideal,aware");
    sweep_cmd->add_option("--reps", sw_reps, "repetitions with derived seeds");
    sweep_cmd->add_option("--aware-protocol", sw_protocol,
                          "per-corner (retrain at each corner) or nominal "
                          "(train at k=0, evaluate across corners)");

    auto* validate_cmd = app.add_subcommand("validate",
                                            "compare the analytical model to the "
                                            "circuit oracle on the first layer");
    add_global_options(*validate_cmd, args);
    std::string val_checkpoint;
    int val_images = 100;
    std::string val_rs = "0.00067,0.0013,0.0027", val_rneu = "0,0.00033,0.00067";
    validate_cmd->add_option("--checkpoint", val_checkpoint, "trained checkpoint")
        ->required();
    validate_cmd->add_option("--images", val_images, "number of test images to average");
    validate_cmd->add_option("--rs-ratios", val_rs, "comma list of rs ratios");
    validate_cmd->add_option("--rneu-ratios", val_rneu, "comma list of rneu ratios");

    auto* netlist_cmd = app.add_subcommand("export-netlist",
                                           "write one layer's resistive network");
    add_global_options(*netlist_cmd, args);
    std::string nl_checkpoint;
    size_t nl_layer = 0;
    long long nl_image = 0;
    netlist_cmd->add_option("--checkpoint", nl_checkpoint, "trained checkpoint")
        ->required();
    netlist_cmd->add_option("--layer", nl_layer, "layer index (default 0)");
    netlist_cmd->add_option("--image", nl_image, "test image index used as input");

    auto* synth_cmd = app.add_subcommand("synth-data",
                                         "generate the synthetic digit corpus as IDX files");
    add_global_options(*synth_cmd, args);
    long long synth_train = 60000, synth_test = 10000, synth_seed = 7;
    synth_cmd->add_option("--train-count", synth_train, "training images to generate");
    synth_cmd->add_option("--test-count", synth_test, "test images to generate");
    synth_cmd->add_option("--data-seed", synth_seed, "generator seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train_cmd->parsed()) {
            xbarnn::AppConfig cfg = resolve_config(args);
            if (!train_mode.empty()) apply_config_key(cfg, "train.mode", train_mode);
            if (!train_rs.empty()) apply_config_key(cfg, "nonideal.rs_ratio", train_rs);
            if (!train_rneu.empty())
                apply_config_key(cfg, "nonideal.rneu_ratio", train_rneu);
            if (!train_tiles.empty()) apply_config_key(cfg, "train.tiles", train_tiles);
            if (train_ksigma != 99)
                apply_config_key(cfg, "nonideal.k_sigma", std::to_string(train_ksigma));
            xbarnn::run_train(cfg, args.out_dir, train_init);
        } else if (eval_cmd->parsed()) {
            xbarnn::AppConfig cfg = resolve_config(args);
            if (!eval_mode.empty()) apply_config_key(cfg, "train.mode", eval_mode);
            if (!eval_rs.empty()) apply_config_key(cfg, "nonideal.rs_ratio", eval_rs);
            if (!eval_rneu.empty())
                apply_config_key(cfg, "nonideal.rneu_ratio", eval_rneu);
            if (eval_ksigma != 99)
                apply_config_key(cfg, "nonideal.k_sigma", std::to_string(eval_ksigma));
            if (!eval_tiles.empty()) apply_config_key(cfg, "train.tiles", eval_tiles);
            xbarnn::run_evaluate(cfg, eval_checkpoint, eval_baseline, args.out_dir);
        } else if (sweep_cmd->parsed()) {
            xbarnn::AppConfig cfg = resolve_config(args);
            xbarnn::SweepSpec spec;
            spec.rs_ratios = xbarnn::parse_double_list(sw_rs);
            spec.rneu_ratios = xbarnn::parse_double_list(sw_rneu);
            spec.k_sigmas = xbarnn::parse_int_list(sw_k);
            spec.tile_grids = xbarnn::parse_tile_grids(sw_tiles);
            spec.repetitions = sw_reps;
            spec.modes.clear();
            if (sw_modes.find("ideal") != std::string::npos)
                spec.modes.push_back(xbarnn::TrainMode::Ideal);
            if (sw_modes.find("aware") != std::string::npos)
                spec.modes.push_back(xbarnn::TrainMode::Aware);
            if (sw_protocol == "nominal")
                spec.protocol = xbarnn::AwareProtocol::Nominal;
            else if (sw_protocol != "per-corner")
                throw xbarnn::ConfigError("--aware-protocol must be per-corner or nominal");
            xbarnn::run_sweep(cfg, spec, args.out_dir);
        } else if (validate_cmd->parsed()) {
            xbarnn::AppConfig cfg = resolve_config(args);
            xbarnn::run_validate(cfg, val_checkpoint, val_images,
                                 xbarnn::parse_double_list(val_rs),
                                 xbarnn::parse_double_list(val_rneu), args.out_dir);
        } else if (netlist_cmd->parsed()) {
            xbarnn::AppConfig cfg = resolve_config(args);
            xbarnn::run_export_netlist(cfg, nl_checkpoint, nl_layer, nl_image,
                                       args.out_dir);
        } else if (synth_cmd->parsed()) {
            xbarnn::run_synth_data(synth_train, synth_test,
                                   static_cast<uint64_t>(synth_seed), args.out_dir);
        }
    } catch (const xbarnn::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const xbarnn::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
