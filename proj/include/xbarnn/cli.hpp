#pragma once

#include "xbarnn/data.hpp"
#include "xbarnn/tech.hpp"
#include "xbarnn/train.hpp"

#include <string>
#include <vector>

namespace xbarnn {

// Everything a run needs: technology, hardware corner, training loop
// parameters, network shape, and dataset locations. Populated from a
// key-value config file and/or command-line flags.
struct AppConfig {
    TechnologyProfile tech = make_profile("TaOx");
    TrainConfig train;
    std::vector<Eigen::Index> layer_dims{784, 500, 10};
    std::string train_images, train_labels, test_images, test_labels;
};

// Applies one `section.key = value` setting. Unknown keys raise ConfigError
// listing the valid ones.
void apply_config_key(AppConfig& cfg, const std::string& key, const std::string& value);

// Parses a config file of `key = value` lines; '#' starts a comment.
AppConfig parse_config_file(const std::string& path);

std::vector<std::string> config_keys();

// List parsing used by config values and CLI flags.
std::vector<double> parse_double_list(const std::string& text);
std::vector<int> parse_int_list(const std::string& text);
TileSpec parse_tiles(const std::string& text);                  // "784x500,500x10"
std::vector<TileSpec> parse_tile_grids(const std::string& text);  // ";"-separated
std::string tiles_to_string(const TileSpec& tiles);

// Loads the configured dataset pair, or falls back to the synthetic digit
// corpus when no paths are configured.
Dataset load_split(const AppConfig& cfg, Split split);

enum class AwareProtocol {
    PerCorner,  // retrain at every grid cell, evaluating at that corner
    Nominal,    // retrain at k_sigma = 0, evaluate across variation corners
};

struct SweepSpec {
    std::vector<double> rs_ratios;
    std::vector<double> rneu_ratios;
    std::vector<int> k_sigmas;
    std::vector<TileSpec> tile_grids;  // empty entry list means untiled
    std::vector<TrainMode> modes{TrainMode::Ideal, TrainMode::Aware};
    int repetitions = 3;
    AwareProtocol protocol = AwareProtocol::PerCorner;

    void validate() const;
};

// Experiment drivers behind the CLI subcommands. Each writes its outputs
// under out_dir along with a JSON run manifest.
//
// init_from, when set, loads the master weights of an existing checkpoint
// instead of seeding fresh ones; aware runs typically fine-tune the ideal
// baseline this way.
void run_train(const AppConfig& cfg, const std::string& out_dir,
               const std::string& init_from = "");
void run_evaluate(const AppConfig& cfg, const std::string& checkpoint_path,
                  const std::string& baseline_path, const std::string& out_dir);
void run_sweep(const AppConfig& cfg, const SweepSpec& spec, const std::string& out_dir);
void run_validate(const AppConfig& cfg, const std::string& checkpoint_path,
                  int n_images, const std::vector<double>& rs_ratios,
                  const std::vector<double>& rneu_ratios, const std::string& out_dir);
void run_export_netlist(const AppConfig& cfg, const std::string& checkpoint_path,
                        size_t layer, Eigen::Index image_index, const std::string& out_dir);
void run_synth_data(Eigen::Index train_count, Eigen::Index test_count, uint64_t seed,
                    const std::string& out_dir);

std::string build_id();

}  // namespace xbarnn
