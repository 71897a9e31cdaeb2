#include "xbarnn/cli.hpp"

#include "xbarnn/errors.hpp"

#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

using namespace xbarnn;
namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
    const auto dir = fs::temp_directory_path() / "xbarnn-cli-tests";
    fs::create_directories(dir);
    return dir;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(XBARNN_CLI_PATH) + " " + args + " > " +
                            (work_dir() / "cli.log").string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Small fixture corpus shared by the end-to-end cases.
struct Fixture {
    fs::path data = work_dir() / "data";
    fs::path conf = work_dir() / "tiny.conf";

    Fixture() {
        if (!fs::exists(data / "train-images-idx3-ubyte")) {
            REQUIRE(run_cli("synth-data --out " + data.string() +
                            " --train-count 300 --test-count 80 --data-seed 3") == 0);
        }
        std::ofstream out(conf);
        out << "# tiny smoke config\n"
               "train.layers = 784, 16, 10\n"
               "train.epochs = 2\n"
               "train.batch_size = 50\n"
               "train.learning_rate = 0.5\n"
               "train.seed = 9\n"
               "nonideal.rs_ratio = 0.0027\n"
               "nonideal.rneu_ratio = 0.00067\n";
    }

    std::string dataset_flags() const {
        return " --train-images " + (data / "train-images-idx3-ubyte").string() +
               " --train-labels " + (data / "train-labels-idx1-ubyte").string() +
               " --test-images " + (data / "t10k-images-idx3-ubyte").string() +
               " --test-labels " + (data / "t10k-labels-idx1-ubyte").string();
    }
};

}  // namespace

TEST_CASE("config keys parse and unknown keys list the valid set") {
    AppConfig cfg;
    apply_config_key(cfg, "technology.name", "PCM");
    CHECK(cfg.tech.name == "PCM");
    apply_config_key(cfg, "nonideal.rs_ratio", "0.0013");
    CHECK(cfg.train.nonideal.rs_ratio == 0.0013);
    apply_config_key(cfg, "train.mode", "aware");
    CHECK(cfg.train.mode == TrainMode::Aware);
    apply_config_key(cfg, "train.tiles", "112x100,100x10");
    REQUIRE(cfg.train.tiling.has_value());
    CHECK((*cfg.train.tiling)[0].first == 112);
    apply_config_key(cfg, "train.layers", "784,500,10");
    CHECK(cfg.layer_dims == std::vector<Eigen::Index>{784, 500, 10});

    // Either range bound defines a custom profile; the other follows from
    // the fixed 15:1 ratio.
    apply_config_key(cfg, "technology.r_low_ohm", "40000");
    CHECK(cfg.tech.name == "custom");
    CHECK(cfg.tech.r_high == doctest::Approx(600e3));
    apply_config_key(cfg, "technology.r_high_ohm", "300000");
    CHECK(cfg.tech.r_low == doctest::Approx(20e3));

    CHECK_THROWS_WITH_AS(apply_config_key(cfg, "train.momentum", "0.9"),
                         doctest::Contains("Valid keys"), ConfigError);
    CHECK_THROWS_AS(apply_config_key(cfg, "train.epochs", "three"), ConfigError);
    CHECK_THROWS_AS(apply_config_key(cfg, "train.mode", "fast"), ConfigError);
}

TEST_CASE("config files support comments and reject malformed lines") {
    const auto path = work_dir() / "parse.conf";
    {
        std::ofstream out(path);
        out << "# comment line\n"
               "technology.name = TaOx   # trailing comment\n"
               "\n"
               "nonideal.k_sigma = -2\n"
               "train.quantize = false\n";
    }
    const AppConfig cfg = parse_config_file(path.string());
    CHECK(cfg.tech.name == "TaOx");
    CHECK(cfg.train.nonideal.k_sigma == -2);
    CHECK_FALSE(cfg.train.quantize_weights);

    {
        std::ofstream out(path);
        out << "technology.name TaOx\n";
    }
    CHECK_THROWS_WITH_AS(parse_config_file(path.string()),
                         doctest::Contains("expected 'key = value'"), ConfigError);
    CHECK_THROWS_AS(parse_config_file("/nonexistent/config"), ConfigError);
}

TEST_CASE("list and tile parsing") {
    CHECK(parse_double_list("0, 0.1 ,2e-3") == std::vector<double>{0.0, 0.1, 2e-3});
    CHECK(parse_int_list("-2,0,2") == std::vector<int>{-2, 0, 2});
    const TileSpec tiles = parse_tiles("784x500,500x10");
    CHECK(tiles.size() == 2);
    CHECK(tiles[1] == std::pair<Eigen::Index, Eigen::Index>(500, 10));
    CHECK(tiles_to_string(tiles) == "784x500+500x10");
    CHECK(tiles_to_string({}) == "full");
    CHECK_THROWS_AS(parse_tiles("784by500"), ConfigError);

    const auto grids = parse_tile_grids("full;112x100,100x10");
    CHECK(grids.size() == 2);
    CHECK(grids[0].empty());
    CHECK(grids[1].size() == 2);
}

TEST_CASE("sweep spec validation") {
    SweepSpec spec;
    spec.rs_ratios = {0.001};
    spec.rneu_ratios = {0.0};
    spec.k_sigmas = {0};
    spec.tile_grids = {{}};
    spec.validate();
    spec.repetitions = 0;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
}

TEST_CASE("cli end-to-end: train, evaluate, validate, netlist, sweep") {
    Fixture fx;
    const auto out = work_dir() / "run";
    fs::remove_all(out);

    SUBCASE("train then evaluate and degrade") {
        REQUIRE(run_cli("train --config " + fx.conf.string() + fx.dataset_flags() +
                        " --mode ideal --out " + out.string()) == 0);
        CHECK(fs::exists(out / "checkpoint.xbnn"));
        CHECK(fs::exists(out / "history.csv"));
        CHECK(fs::exists(out / "manifest-train.json"));
        const std::string manifest = read_file(out / "manifest-train.json");
        CHECK(manifest.find("\"seed\": 9") != std::string::npos);
        CHECK(manifest.find("run_to_run_tolerance") != std::string::npos);

        CHECK(run_cli("evaluate --config " + fx.conf.string() + fx.dataset_flags() +
                      " --checkpoint " + (out / "checkpoint.xbnn").string() +
                      " --baseline " + (out / "checkpoint.xbnn").string() +
                      " --mode aware --out " + out.string()) == 0);

        CHECK(run_cli("validate --config " + fx.conf.string() + fx.dataset_flags() +
                      " --checkpoint " + (out / "checkpoint.xbnn").string() +
                      " --images 5 --rs-ratios 0.0027 --rneu-ratios 0,0.00067 --out " +
                      out.string()) == 0);
        CHECK(fs::exists(out / "validate.csv"));
        CHECK(fs::exists(out / "currents.csv"));

        CHECK(run_cli("export-netlist --config " + fx.conf.string() + fx.dataset_flags() +
                      " --checkpoint " + (out / "checkpoint.xbnn").string() +
                      " --layer 1 --image 2 --out " + out.string()) == 0);
        const std::string netlist = read_file(out / "netlist.txt");
        CHECK(netlist.find("R ") != std::string::npos);
        CHECK(netlist.find("I ") != std::string::npos);

        // Aware fine-tune from the ideal checkpoint.
        CHECK(run_cli("train --config " + fx.conf.string() + fx.dataset_flags() +
                      " --mode aware --init-from " + (out / "checkpoint.xbnn").string() +
                      " --out " + (out / "aware").string()) == 0);
    }

    SUBCASE("sweep produces one row per cell per repetition") {
        const auto sweep_out = work_dir() / "sweep";
        fs::remove_all(sweep_out);
        REQUIRE(run_cli("sweep --config " + fx.conf.string() + fx.dataset_flags() +
                        " --rs-ratios 0.0027 --rneu-ratios 0,0.00067 --k-sigmas 0"
                        " --tile-grids full --modes ideal,aware --reps 2 --out " +
                        sweep_out.string()) == 0);
        const std::string rows = read_file(sweep_out / "sweep.csv");
        // Header + 2 modes * 2 rneu * 2 reps.
        CHECK(std::count(rows.begin(), rows.end(), '\n') == 9);
        CHECK(rows.find("ideal,") != std::string::npos);
        CHECK(rows.find("aware,") != std::string::npos);
        CHECK(fs::exists(sweep_out / "sweep_summary.csv"));

        // Reruns reproduce the rows exactly.
        const auto rerun_out = work_dir() / "sweep2";
        fs::remove_all(rerun_out);
        REQUIRE(run_cli("sweep --config " + fx.conf.string() + fx.dataset_flags() +
                        " --rs-ratios 0.0027 --rneu-ratios 0,0.00067 --k-sigmas 0"
                        " --tile-grids full --modes ideal,aware --reps 2 --out " +
                        rerun_out.string()) == 0);
        CHECK(read_file(rerun_out / "sweep.csv") == rows);
    }
}

TEST_CASE("cli exit codes distinguish config errors") {
    Fixture fx;
    // Missing config file.
    CHECK(run_cli("train --config /nonexistent.conf") == 2);
    // Unknown config key.
    const auto bad = work_dir() / "bad.conf";
    std::ofstream(bad) << "train.turbo = yes\n";
    CHECK(run_cli("train --config " + bad.string()) == 2);
    // Missing dataset file.
    CHECK(run_cli("evaluate --checkpoint /nonexistent.xbnn --test-images /nope"
                  " --test-labels /nope2") == 2);
    // Bad subcommand usage is a CLI parse error (handled by the parser).
    CHECK(run_cli("evaluate") != 0);
}
