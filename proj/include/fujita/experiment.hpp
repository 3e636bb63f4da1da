#pragma once

#include "fujita/config.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fujita {

/// Subcommands understood by run_experiment.
const std::vector<std::string>& experiment_commands();

struct RunRequest {
    std::string command;
    std::filesystem::path config;
    std::filesystem::path out_dir;
    int jobs = 1;
    /// Overrides the config seed when set.
    std::optional<std::uint64_t> seed;
};

/// Loads and validates the config, runs the subcommand, writes manifest.txt
/// and the command's CSV/SVG files into out_dir, and prints a short summary
/// to `log`. Every failure surfaces as Error with its code.
void run_experiment(const RunRequest& request, std::ostream& log);

/// Auto radius for a run whose longest time is t_max.
double auto_radius(double t_max);

}  // namespace fujita
