#pragma once

// Run configuration for the traj-constrain commands. Each command reads one
// JSON document; everything is validated before any computation starts.

#include <trajcon/io.hpp>
#include <trajcon/oracle.hpp>
#include <trajcon/rfs.hpp>
#include <trajcon/scenario.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace trajcon::cli {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parses a JSON file. Syntax errors are reported as "file:line:column: ...".
Json load_json_file(const std::filesystem::path& path);

struct Common {
    std::uint64_t seed = 0;
    std::optional<std::string> out_dir;
};

struct SimulateConfig {
    Common common;
    TimeWindow window{0, 0};
    MotionModel motion;
    SensorModel sensor;
};

struct NamedConstraintSet {
    std::string name;
    ConstraintSet set;
};

struct TrackSpec {
    enum class Source { measurements, scenario_file, simulate };
    Source source = Source::simulate;
    std::vector<TimedMeasurement> measurements;
    std::filesystem::path scenario_path;
    std::size_t truth_index = 0;
    double r0 = 1.0;
    std::size_t slack = 3;
};

struct ConstrainConfig {
    Common common;
    std::optional<TimeWindow> window;
    std::optional<MotionModel> motion;
    std::optional<SensorModel> sensor;
    /// Exactly one of these three is set.
    std::optional<TrackSpec> track;
    std::optional<BernoulliTrajectory> bernoulli;
    std::optional<PppTrajectory> ppp;
    std::vector<NamedConstraintSet> sets;
    std::size_t budget = 100000;
    std::size_t marginal_budget = 100000;
};

struct OracleCase {
    std::string name;
    /// "bernoulli", "ppp" or "pmbm".
    std::string type;
    /// Explicit instance; the member matching `type` is set.
    std::optional<BernoulliTrajectory> bernoulli;
    std::optional<PppTrajectory> ppp;
    std::optional<PmbmDensity> pmbm;
    std::optional<ConstraintSet> constraints;
    /// Otherwise random_count random instances. Mode is "single",
    /// "conjunct", "disjunct" or "any".
    std::size_t random_count = 0;
    std::string random_mode = "any";
    std::size_t max_state_dim = 2;
    std::size_t max_window = 10;
    std::size_t max_constraints = 4;
    std::optional<std::size_t> n;
};

struct OracleConfig {
    Common common;
    std::size_t n = 20000;
    double z_threshold = 4.0;
    std::size_t engine_budget = 100000;
    bool check_moments = true;
    std::vector<OracleCase> cases;
    /// Test fixture: multiplies every constrained r (capped at 1) and mu
    /// before comparison, so a correct engine must fail.
    std::optional<double> scale_constrained_existence;
};

SimulateConfig parse_simulate(const Json& j);
/// `base_dir` resolves relative file references.
ConstrainConfig parse_constrain(const Json& j, const std::filesystem::path& base_dir);
OracleConfig parse_oracle(const Json& j);

}  // namespace trajcon::cli
