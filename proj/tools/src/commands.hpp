#pragma once

#include "config.hpp"

#include <trajcon/oracle.hpp>
#include <trajcon/scenario.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace trajcon::cli {

enum ExitCode : int {
    kSuccess = 0,
    kConfigError = 1,
    kNumericalError = 2,
    kOracleFailure = 3,
};

struct RunOptions {
    std::filesystem::path config;
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> out_dir;
    bool verbose = false;
};

/// Loads the config, runs `command` (simulate, constrain or oracle) and maps
/// failures to exit codes. Messages go to `err`, a short summary to `out`.
int run(const std::string& command, const RunOptions& options, std::ostream& out, std::ostream& err);

/// Writes scenario.json, trajectories.csv and measurements.csv.
Scenario cmd_simulate(const SimulateConfig& config, const std::filesystem::path& out_dir, std::ostream& log);

/// Writes fitted_bernoulli.json (track input only), <set>_marginals.csv and
/// <set>_density.json per constraint set, and summary.json. Returns the
/// summary document.
Json cmd_constrain(const ConstrainConfig& config, const std::filesystem::path& out_dir, std::ostream& log);

struct OracleRun {
    std::string case_name;
    std::size_t instance = 0;
    OracleReport report;
};

/// Writes oracle_report.json and oracle_report.txt.
std::vector<OracleRun> cmd_oracle(const OracleConfig& config, const std::filesystem::path& out_dir,
                                  std::ostream& log);

}  // namespace trajcon::cli
