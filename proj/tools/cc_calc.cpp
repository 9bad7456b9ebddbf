#include <CLI11.hpp>
#include <Eigen/Core>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "cc/builtin.hpp"
#include "cc/diff.hpp"
#include "cc/experiments.hpp"

namespace {

int apply_config_file(const std::string& path, cc::ExperimentConfig& cfg) {
    std::ifstream in(path);
    if (!in) {
        std::cerr << "cc_calc: cannot open config file " << path << "\n";
        return 2;
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        std::cerr << "cc_calc: bad config file: " << e.what() << "\n";
        return 2;
    }
    if (j.contains("space")) cfg.space = j["space"].get<std::string>();
    if (j.contains("experiment")) cfg.experiment = j["experiment"].get<std::string>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("out")) cfg.output_dir = j["out"].get<std::string>();
    if (j.contains("samples")) cfg.samples = j["samples"].get<int>();
    if (j.contains("map")) cfg.map = j["map"].get<std::string>();
    if (j.contains("eps_grid"))
        cfg.eps_grid = j["eps_grid"].get<std::vector<double>>();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"batch experiment runner for CC-space calculus"};

    cc::ExperimentConfig cfg;
    std::string config_file;
    bool show_spaces = false, show_maps = false;

    app.add_option("--space", cfg.space, "builtin space name or JSON space file");
    app.add_option("--experiment", cfg.experiment,
                   "one of: validate, metrics, nilpotent_rates, chow, ballbox, "
                   "measure, differential, area");
    app.add_option("--seed", cfg.seed, "RNG seed (outputs are deterministic)");
    app.add_option("--out", cfg.output_dir, "output directory for CSV tables");
    app.add_option("--samples", cfg.samples, "sample count override");
    app.add_option("--eps-grid", cfg.eps_grid, "epsilon grid")->delimiter(',');
    app.add_option("--map", cfg.map, "test map for differential/area experiments");
    app.add_option("--config", config_file, "JSON config file (overrides flags)");
    app.add_flag("--list-spaces", show_spaces, "print builtin space names");
    app.add_flag("--list-maps", show_maps, "print builtin test-map names");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (const char* threads = std::getenv("CC_CALC_THREADS"))
        Eigen::setNbThreads(std::max(1, std::atoi(threads)));

    if (show_spaces) {
        for (const auto& s : cc::list_builtin()) std::cout << s << "\n";
        return 0;
    }
    if (show_maps) {
        for (const auto& m : cc::list_maps()) std::cout << m << "\n";
        return 0;
    }

    if (!config_file.empty())
        if (int rc = apply_config_file(config_file, cfg)) return rc;

    if (cfg.experiment.empty()) {
        std::cerr << "cc_calc: --experiment is required (one of:";
        for (const auto& e : cc::list_experiments()) std::cerr << " " << e;
        std::cerr << ")\n";
        return 2;
    }

    auto res = cc::run_experiment(cfg);
    if (!res.message.empty()) std::cerr << "cc_calc: " << res.message << "\n";
    for (const auto& [name, ok] : res.invariants)
        std::cout << name << ": " << (ok ? "pass" : "FAIL") << "\n";
    for (const auto& f : res.files_written) std::cout << "wrote " << f << "\n";
    return res.exit_code;
}
