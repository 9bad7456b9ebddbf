#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cc/structure.hpp"

namespace cc {

struct ExperimentConfig {
    std::string space = "heisenberg";  // builtin name or path to a JSON file
    std::string experiment;  // validate | metrics | nilpotent_rates | chow |
                             // ballbox | measure | differential | area
    std::uint64_t seed = 0;
    std::string output_dir = ".";
    int samples = 0;                // 0 = experiment default
    std::vector<double> eps_grid;   // empty = experiment default
    std::string map = "identity";
};

struct ExperimentResult {
    int exit_code = 0;  // 0 ok, 1 invariant failed, 2 config error
    std::vector<std::pair<std::string, bool>> invariants;
    std::vector<std::string> files_written;
    std::string message;
};

std::vector<std::string> list_experiments();

/// Loads a builtin space or a JSON space file.
CCStructure resolve_space(const std::string& name_or_path);

/// Runs one experiment, writing its CSV tables plus summary.csv into
/// config.output_dir.
ExperimentResult run_experiment(const ExperimentConfig& config);

}  // namespace cc
