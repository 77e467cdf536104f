#include "commands.hpp"

#include <trajcon/io.hpp>

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace fs = std::filesystem;
using namespace trajcon;
using namespace trajcon::cli;

namespace {

const fs::path kConfigDir = TRAJCON_CONFIG_DIR;

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("trajcon_cli_") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    fs::path write_config(const std::string& name, const std::string& text) const {
        const auto p = dir_ / name;
        std::ofstream(p) << text;
        return p;
    }

    int run_in_process(const std::string& command, const fs::path& config, const fs::path& out_dir,
                       std::optional<std::uint64_t> seed = std::nullopt) {
        RunOptions o;
        o.config = config;
        o.out_dir = out_dir;
        o.seed = seed;
        out_.str("");
        err_.str("");
        return run(command, o, out_, err_);
    }

    /// Runs the installed binary; returns its exit status.
    int run_binary(const std::string& args) const {
        const std::string cmd = std::string(TRAJCON_CLI_PATH) + " " + args + " > " + (dir_ / "stdout.txt").string() +
                                " 2> " + (dir_ / "stderr.txt").string();
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    fs::path dir_;
    std::ostringstream out_;
    std::ostringstream err_;
};

std::string read_file(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines_of(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::string> out;
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

const char* kNoBirths = R"({
  "command": "simulate",
  "seed": 3,
  "window": {"alpha": 0, "gamma": 20},
  "motion": {"transition": [[1]], "process_noise": [[0.1]], "survival": 0.9, "birth_rate": 0,
             "birth_mean": [0], "birth_covariance": [[1]]},
  "sensor": {"measurement": [[1]], "noise": [[1]], "detection": 0.9, "clutter_rate": 0}
})";

}  // namespace

TEST_F(CliTest, SimulateIsDeterministicForSeed) {
    const auto cfg = kConfigDir / "simulate_seven_targets.json";
    ASSERT_EQ(run_in_process("simulate", cfg, dir_ / "a"), kSuccess) << err_.str();
    ASSERT_EQ(run_in_process("simulate", cfg, dir_ / "b"), kSuccess) << err_.str();
    ASSERT_EQ(run_in_process("simulate", cfg, dir_ / "c", 12345), kSuccess) << err_.str();
    for (const char* f : {"trajectories.csv", "measurements.csv", "scenario.json"}) {
        EXPECT_EQ(read_file(dir_ / "a" / f), read_file(dir_ / "b" / f)) << f;
    }
    EXPECT_NE(read_file(dir_ / "a" / "measurements.csv"), read_file(dir_ / "c" / "measurements.csv"));
}

TEST_F(CliTest, SimulateSevenTargetConfig) {
    ASSERT_EQ(run_in_process("simulate", kConfigDir / "simulate_seven_targets.json", dir_), kSuccess) << err_.str();
    const auto lines = lines_of(dir_ / "trajectories.csv");
    ASSERT_GE(lines.size(), 2u);
    EXPECT_EQ(lines[0], "# schema_version=1");
    EXPECT_EQ(lines[1].rfind("trajectory,time,", 0), 0u);
    std::set<std::string> ids;
    for (std::size_t i = 2; i < lines.size(); ++i) ids.insert(lines[i].substr(0, lines[i].find(',')));
    EXPECT_EQ(ids.size(), 7u);

    const auto sc = scenario_from_json(Json::parse(read_file(dir_ / "scenario.json")));
    EXPECT_EQ(sc.truth.size(), 7u);
    EXPECT_EQ(sc.scans.size(), 101u);
}

TEST_F(CliTest, NoBirthsGivesHeaderOnlyCsv) {
    const auto cfg = write_config("none.json", kNoBirths);
    ASSERT_EQ(run_in_process("simulate", cfg, dir_ / "out"), kSuccess) << err_.str();
    const auto lines = lines_of(dir_ / "out" / "trajectories.csv");
    ASSERT_EQ(lines.size(), 2u);
    EXPECT_EQ(lines[0], "# schema_version=1");
    EXPECT_EQ(lines[1], "trajectory,time,x0");
}

TEST_F(CliTest, ConstrainTrackConfig) {
    ASSERT_EQ(run_in_process("constrain", kConfigDir / "constrain_track.json", dir_), kSuccess) << err_.str();
    const auto summary = Json::parse(read_file(dir_ / "summary.json"));
    ASSERT_TRUE(summary.contains("sets"));
    for (const auto& set : summary["sets"]) {
        const double r = set.at("r").get<double>();
        const double rc = set.at("r_constrained").get<double>();
        EXPECT_GE(rc, 0.0);
        EXPECT_LE(rc, r);
        for (const auto& check : set.at("region_checks")) {
            if (check.at("applicable").get<bool>()) {
                EXPECT_TRUE(check.at("inside").get<bool>()) << set.dump(2);
            }
        }
        double total = 0.0;
        for (const auto& p : set.at("pmf_constrained")) total += p.at("probability").get<double>();
        EXPECT_NEAR(total, 1.0, 1e-12);
        const auto name = set.at("name").get<std::string>();
        const auto lines = lines_of(dir_ / (name + "_marginals.csv"));
        ASSERT_GE(lines.size(), 3u);
        EXPECT_EQ(lines[0], "# schema_version=1");
        const auto density = bernoulli_from_json(Json::parse(read_file(dir_ / (name + "_density.json"))));
        EXPECT_NEAR(density.r, rc, 1e-12);
    }
    EXPECT_TRUE(fs::exists(dir_ / "fitted_bernoulli.json"));
}

TEST_F(CliTest, DefaultOracleConfigPasses) {
    ASSERT_EQ(run_in_process("oracle", kConfigDir / "oracle_default.json", dir_), kSuccess) << err_.str();
    const auto report = Json::parse(read_file(dir_ / "oracle_report.json"));
    EXPECT_EQ(report.at("passed"), true);
    EXPECT_TRUE(fs::exists(dir_ / "oracle_report.txt"));
}

TEST_F(CliTest, CorruptedExistenceFailsOracle) {
    const auto cfg = write_config("corrupt.json", R"({
  "command": "oracle",
  "seed": 4,
  "oracle": {"n": 20000, "cases": [{"type": "bernoulli", "random": {"count": 1, "mode": "conjunct"}}]},
  "testing": {"scale_constrained_existence": 1.5}
})");
    EXPECT_EQ(run_in_process("oracle", cfg, dir_ / "out"), kOracleFailure) << err_.str();
    EXPECT_EQ(run_binary("oracle --config " + cfg.string() + " --out-dir " + (dir_ / "bin").string()),
              kOracleFailure);
}

TEST_F(CliTest, MalformedJsonReportsLineAndColumn) {
    const auto cfg = write_config("bad.json", "{\n  \"seed\": 1,\n  \"window\": {\"alpha\": 0,, }\n}\n");
    EXPECT_EQ(run_in_process("simulate", cfg, dir_ / "out"), kConfigError);
    EXPECT_NE(err_.str().find("bad.json:3:"), std::string::npos) << err_.str();
    EXPECT_EQ(run_binary("simulate --config " + cfg.string()), kConfigError);
    EXPECT_NE(read_file(dir_ / "stderr.txt").find(":3:"), std::string::npos);
}

TEST_F(CliTest, SchemaErrorsNameTheField) {
    std::string text = kNoBirths;
    text.replace(text.find("\"detection\": 0.9"), 16, "\"detection\": 1.9");
    const auto cfg = write_config("prob.json", text);
    EXPECT_EQ(run_in_process("simulate", cfg, dir_ / "out"), kConfigError);
    EXPECT_NE(err_.str().find("/sensor/detection"), std::string::npos) << err_.str();

    std::string unknown = kNoBirths;
    unknown.replace(unknown.find("\"seed\""), 6, "\"sede\"");
    const auto cfg2 = write_config("unknown.json", unknown);
    EXPECT_EQ(run_in_process("simulate", cfg2, dir_ / "out"), kConfigError);
    EXPECT_NE(err_.str().find("sede"), std::string::npos) << err_.str();

    EXPECT_EQ(run_in_process("constrain", write_config("nb.json", kNoBirths), dir_ / "out"), kConfigError);
}

TEST_F(CliTest, MissingConfigOrBadArgumentsIsConfigError) {
    EXPECT_EQ(run_binary("simulate --config " + (dir_ / "missing.json").string()), kConfigError);
    EXPECT_EQ(run_binary("simulate"), kConfigError);
    EXPECT_EQ(run_binary("frobnicate --config x.json"), kConfigError);
    EXPECT_EQ(run_binary("simulate --config x.json --seed notanumber"), kConfigError);
    EXPECT_EQ(run_binary("--help"), kSuccess);
}

namespace {

std::string single_set_config(const std::string& region, trajcon::Time time) {
    return R"({
  "command": "constrain",
  "seed": 2,
  "window": {"alpha": 0, "gamma": 10},
  "bernoulli": {"r": 0.5, "density": {
    "pmf": [{"birth": 0, "death": 2, "probability": 1.0}],
    "conditionals": [{"state_dim": 1, "mean": [0, 0, 0], "covariance": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]}]}},
  "constraint_sets": [{"name": "c", "mode": "single", "constraints": [{"time": )" +
           std::to_string(time) + R"(, "region": )" + region + R"(}]}]
})";
}

}  // namespace

TEST_F(CliTest, ZeroTemporalSupportGivesDegenerateResult) {
    const auto cfg = write_config("zero.json", single_set_config("[[[0, null]]]", 8));
    ASSERT_EQ(run_in_process("constrain", cfg, dir_ / "out"), kSuccess) << err_.str();
    const auto summary = Json::parse(read_file(dir_ / "out" / "summary.json"));
    EXPECT_EQ(summary["sets"][0]["degenerate"], true);
    EXPECT_EQ(summary["sets"][0]["r_constrained"], 0.0);
}

TEST_F(CliTest, VanishingAcceptanceIsNumericalError) {
    // Pr(X1 in [10, 11]) is about 8e-24: positive, but rejection sampling
    // cannot produce constrained marginals.
    const auto cfg = write_config("tail.json", single_set_config("[[[10, 11]]]", 1));
    EXPECT_EQ(run_in_process("constrain", cfg, dir_ / "out"), kNumericalError) << err_.str();
    EXPECT_NE(err_.str().find("rejection sampling"), std::string::npos) << err_.str();
}

TEST_F(CliTest, BinarySimulateWritesOutputs) {
    const auto out = dir_ / "bin";
    ASSERT_EQ(run_binary("simulate --config " + (kConfigDir / "simulate_seven_targets.json").string() + " --seed 9 --out-dir " +
                         out.string()),
              kSuccess)
        << read_file(dir_ / "stderr.txt");
    EXPECT_TRUE(fs::exists(out / "trajectories.csv"));
    EXPECT_TRUE(fs::exists(out / "measurements.csv"));
    EXPECT_EQ(lines_of(out / "measurements.csv").front(), "# schema_version=1");
}
