#include "commands.hpp"

#include "csv.hpp"

#include <trajcon/constrain.hpp>
#include <trajcon/errors.hpp>
#include <trajcon/instances.hpp>
#include <trajcon/io.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>

namespace trajcon::cli {
namespace {

namespace fs = std::filesystem;

void write_json(const fs::path& path, const Json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

std::string mode_name(ConstraintMode m) { return m == ConstraintMode::conjunct ? "conjunct" : "disjunct"; }

std::vector<std::string> state_columns(const std::string& prefix, std::size_t d) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < d; ++i) out.push_back(prefix + std::to_string(i));
    return out;
}

Json diagnostics_json(const RejectionDiagnostics& d) {
    return {{"proposals", d.proposals}, {"accepted", d.accepted}, {"acceptance_rate", d.acceptance_rate}};
}

/// Per-step CSV: unconstrained moments next to the rejection-sampled
/// constrained ones. Steps without constrained samples leave those cells empty.
void write_marginals(const fs::path& path, std::size_t d, const std::vector<StepMoments>& base,
                     const std::vector<StepMoments>& constrained) {
    std::vector<std::string> header{"time", "unconstrained_alive"};
    for (std::size_t i = 0; i < d; ++i) {
        const auto s = std::to_string(i);
        header.insert(header.end(), {"unconstrained_mean_" + s, "unconstrained_sd_" + s});
    }
    header.push_back("constrained_alive");
    header.push_back("constrained_samples");
    for (std::size_t i = 0; i < d; ++i) {
        const auto s = std::to_string(i);
        header.insert(header.end(), {"constrained_mean_" + s, "constrained_sd_" + s, "constrained_mean_se_" + s});
    }
    CsvWriter csv(path, header);

    std::map<Time, const StepMoments*> by_time;
    for (const auto& s : constrained) by_time[s.time] = &s;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& b : base) {
        std::vector<std::string> row{CsvWriter::num(static_cast<long long>(b.time)), CsvWriter::num(b.alive_mass)};
        for (std::size_t i = 0; i < d; ++i) {
            const auto k = static_cast<Eigen::Index>(i);
            row.push_back(CsvWriter::num(b.mean[k]));
            row.push_back(CsvWriter::num(std::sqrt(std::max(0.0, b.covariance(k, k)))));
        }
        const auto it = by_time.find(b.time);
        const StepMoments* c = it == by_time.end() ? nullptr : it->second;
        row.push_back(CsvWriter::num(c ? c->alive_mass : 0.0));
        row.push_back(CsvWriter::num(static_cast<long long>(c ? c->samples : 0)));
        for (std::size_t i = 0; i < d; ++i) {
            const auto k = static_cast<Eigen::Index>(i);
            row.push_back(CsvWriter::num(c ? c->mean[k] : nan));
            row.push_back(CsvWriter::num(c ? std::sqrt(std::max(0.0, c->covariance(k, k))) : nan));
            row.push_back(CsvWriter::num(c ? c->mean_std_error[k] : nan));
        }
        csv.row(row);
    }
}

/// For conjunct sets, the constrained mean at a single-box constraint time
/// must lie inside the box.
Json region_checks(const ConstraintSet& cs, const std::vector<StepMoments>& steps) {
    Json out = Json::array();
    std::map<Time, const StepMoments*> by_time;
    for (const auto& s : steps) by_time[s.time] = &s;
    for (const auto& c : cs.constraints()) {
        const auto it = by_time.find(c.time);
        Json e = {{"time", c.time}};
        const bool applicable = cs.mode() == ConstraintMode::conjunct && c.region.boxes().size() == 1;
        e["applicable"] = applicable && it != by_time.end();
        if (it != by_time.end()) {
            e["mean"] = vector_to_json(it->second->mean);
            e["inside"] = c.region.contains(it->second->mean);
        } else {
            e["mean"] = nullptr;
            e["inside"] = nullptr;
        }
        out.push_back(std::move(e));
    }
    return out;
}

Json pmf_json(const BirthDeathPmf& pmf) {
    Json out = Json::array();
    for (const auto& e : pmf.entries) {
        out.push_back({{"birth", e.lifetime.birth}, {"death", e.lifetime.death}, {"probability", e.probability}});
    }
    return out;
}

BernoulliTrajectory fitted_track(const ConstrainConfig& c, std::ostream& log, bool verbose) {
    const auto& spec = *c.track;
    std::vector<TimedMeasurement> meas;
    if (spec.source == TrackSpec::Source::measurements) {
        meas = spec.measurements;
    } else {
        Scenario sc = spec.source == TrackSpec::Source::simulate
                          ? simulate_scenario(*c.motion, *c.sensor, *c.window, c.common.seed)
                          : scenario_from_json(load_json_file(spec.scenario_path));
        if (spec.source == TrackSpec::Source::scenario_file && !(sc.window == *c.window)) {
            throw ConfigError("/track/scenario: scenario window differs from the config window");
        }
        if (spec.truth_index >= sc.truth.size()) {
            throw ConfigError("/track/truth_index: scenario has " + std::to_string(sc.truth.size()) +
                              " trajectories");
        }
        meas = associated_measurements(sc, spec.truth_index);
        if (verbose) {
            log << "track: trajectory " << spec.truth_index << " with " << meas.size() << " associated measurements\n";
        }
    }
    if (meas.empty()) throw std::runtime_error("the selected track has no associated measurements");
    return fit_bernoulli_track(meas, *c.motion, *c.sensor, *c.window, spec.r0, FitOptions{spec.slack});
}

std::uint64_t case_seed(std::uint64_t seed, std::size_t case_index, std::size_t instance) {
    return derive_seed(seed, 1000 + case_index, instance);
}

ConstraintMode pick_mode(const std::string& mode, Rng& rng, std::optional<std::size_t>& count) {
    std::string m = mode;
    if (m == "any") {
        static const char* kModes[] = {"single", "conjunct", "disjunct"};
        m = kModes[std::uniform_int_distribution<int>(0, 2)(rng)];
    }
    if (m == "single") {
        count = 1;
        return ConstraintMode::conjunct;
    }
    return m == "conjunct" ? ConstraintMode::conjunct : ConstraintMode::disjunct;
}

double scaled(double v, const std::optional<double>& s, double cap) {
    return s ? std::min(cap, v * *s) : v;
}

void corrupt(BernoulliTrajectory& b, const std::optional<double>& s) { b.r = scaled(b.r, s, 1.0); }
void corrupt(PppTrajectory& p, const std::optional<double>& s) {
    p.mu = scaled(p.mu, s, std::numeric_limits<double>::infinity());
}

}  // namespace

Scenario cmd_simulate(const SimulateConfig& config, const fs::path& out_dir, std::ostream& log) {
    fs::create_directories(out_dir);
    Scenario sc = simulate_scenario(config.motion, config.sensor, config.window, config.common.seed);
    write_json(out_dir / "scenario.json", scenario_to_json(sc));

    const std::size_t d = config.motion.state_dim();
    std::vector<std::string> header{"trajectory", "time"};
    for (auto& h : state_columns("x", d)) header.push_back(h);
    CsvWriter traj(out_dir / "trajectories.csv", header);
    for (std::size_t i = 0; i < sc.truth.size(); ++i) {
        const auto& t = sc.truth[i];
        for (Time k = t.birth(); k <= t.death(); ++k) {
            std::vector<std::string> row{std::to_string(i), std::to_string(k)};
            const Eigen::VectorXd x = t.state(k);
            for (Eigen::Index j = 0; j < x.size(); ++j) row.push_back(CsvWriter::num(x[j]));
            traj.row(row);
        }
    }

    const std::size_t m = config.sensor.measurement_dim();
    header = {"time", "truth"};
    for (auto& h : state_columns("z", m)) header.push_back(h);
    CsvWriter meas(out_dir / "measurements.csv", header);
    std::size_t n_meas = 0;
    for (const auto& scan : sc.scans) {
        for (const auto& z : scan.measurements) {
            std::vector<std::string> row{std::to_string(scan.time),
                                         z.truth_index ? std::to_string(*z.truth_index) : std::string()};
            for (Eigen::Index j = 0; j < z.z.size(); ++j) row.push_back(CsvWriter::num(z.z[j]));
            meas.row(row);
            ++n_meas;
        }
    }
    log << "simulate: " << sc.truth.size() << " trajectories, " << n_meas << " measurements over "
        << config.window.alpha() << ".." << config.window.gamma() << " -> " << out_dir.string() << "\n";
    return sc;
}

Json cmd_constrain(const ConstrainConfig& config, const fs::path& out_dir, std::ostream& log) {
    fs::create_directories(out_dir);
    const bool is_ppp = config.ppp.has_value();
    BernoulliTrajectory bern;
    PppTrajectory ppp;
    if (config.track) {
        bern = fitted_track(config, log, true);
        write_json(out_dir / "fitted_bernoulli.json", bernoulli_to_json(bern));
    } else if (config.bernoulli) {
        bern = *config.bernoulli;
    } else {
        ppp = *config.ppp;
    }
    const TrajectoryDensity& base = is_ppp ? ppp.density : bern.density;
    const double scale = is_ppp ? ppp.mu : bern.r;
    const auto base_steps = step_marginals(base);
    const std::size_t d = base.state_dim();

    Json summary = {{"seed", config.common.seed},
                    {"component", is_ppp ? "ppp" : "bernoulli"},
                    {is_ppp ? "mu" : "r", scale},
                    {"pmf", pmf_json(base.pmf)}};
    Json sets = Json::array();
    for (std::size_t i = 0; i < config.sets.size(); ++i) {
        const auto& ns = config.sets[i];
        const McOptions mc{config.budget, derive_seed(config.common.seed, 1, i), true};
        TrajectoryDensity cdens;
        double cscale = 0.0;
        bool degenerate = false;
        if (is_ppp) {
            auto c = constrain_ppp(ppp, ns.set, mc);
            write_json(out_dir / (ns.name + "_density.json"), ppp_to_json(c));
            cscale = c.mu;
            degenerate = c.degenerate;
            cdens = std::move(c.density);
        } else {
            auto c = constrain_bernoulli(bern, ns.set, mc);
            write_json(out_dir / (ns.name + "_density.json"), bernoulli_to_json(c));
            cscale = c.r;
            degenerate = c.degenerate;
            cdens = std::move(c.density);
        }

        Json entry = {{"name", ns.name},
                      {"mode", ns.set.size() == 1 ? "single" : mode_name(ns.set.mode())},
                      {is_ppp ? "mu" : "r", scale},
                      {is_ppp ? "mu_constrained" : "r_constrained", cscale},
                      {"degenerate", degenerate}};
        std::vector<StepMoments> csteps;
        if (cdens.truncation) {
            entry["report"] = report_to_json(cdens.truncation->report);
            Json accept = Json::array();
            for (std::size_t j = 0; j < cdens.pmf.size(); ++j) {
                const auto& lt = cdens.pmf.entries[j].lifetime;
                const auto& pt = cdens.truncation->pairs[j];
                accept.push_back({{"birth", lt.birth},
                                  {"death", lt.death},
                                  {"active", !pt.active.empty()},
                                  {"acceptance", pt.acceptance.value},
                                  {"std_error", pt.acceptance.std_error}});
            }
            entry["pairs"] = std::move(accept);
            entry["pmf_constrained"] = pmf_json(cdens.pmf);
        } else {
            entry["report"] = nullptr;
        }
        if (!degenerate) {
            const McOptions mmc{config.marginal_budget, derive_seed(config.common.seed, 2, i), true};
            const auto cm = constrained_marginals(cdens, mmc);
            csteps = cm.steps;
            entry["diagnostics"] = diagnostics_json(cm.diagnostics);
        } else {
            entry["diagnostics"] = nullptr;
        }
        entry["region_checks"] = region_checks(ns.set, csteps);
        write_marginals(out_dir / (ns.name + "_marginals.csv"), d, base_steps, csteps);
        log << "constrain " << ns.name << ": " << (is_ppp ? "mu=" : "r=") << scale
            << (is_ppp ? " mu_c=" : " r_c=") << cscale << (degenerate ? " (degenerate)" : "") << "\n";
        sets.push_back(std::move(entry));
    }
    summary["sets"] = std::move(sets);
    write_json(out_dir / "summary.json", summary);
    return summary;
}

std::vector<OracleRun> cmd_oracle(const OracleConfig& config, const fs::path& out_dir, std::ostream& log) {
    fs::create_directories(out_dir);
    std::vector<OracleRun> runs;
    for (std::size_t ci = 0; ci < config.cases.size(); ++ci) {
        const auto& oc = config.cases[ci];
        const std::size_t count = oc.random_count > 0 ? oc.random_count : 1;
        for (std::size_t k = 0; k < count; ++k) {
            const std::uint64_t seed = case_seed(config.common.seed, ci, k);
            OracleOptions opts;
            opts.n = oc.n.value_or(config.n);
            opts.z_threshold = config.z_threshold;
            opts.seed = derive_seed(seed, 1);
            opts.engine = McOptions{config.engine_budget, derive_seed(seed, 2), true};
            opts.check_moments = config.check_moments;

            std::optional<BernoulliTrajectory> b = oc.bernoulli;
            std::optional<PppTrajectory> p = oc.ppp;
            std::optional<PmbmDensity> m = oc.pmbm;
            std::optional<ConstraintSet> cs = oc.constraints;
            if (oc.random_count > 0) {
                Rng rng(derive_seed(seed, 3));
                InstanceOptions io;
                io.max_state_dim = oc.max_state_dim;
                io.max_window = oc.max_window;
                io.max_constraints = oc.max_constraints;
                const auto shape = random_shape(rng, io);
                const TrajectoryDensity* for_constraints = nullptr;
                if (oc.type == "bernoulli") {
                    b = random_bernoulli(rng, shape, io);
                    for_constraints = &b->density;
                } else if (oc.type == "ppp") {
                    p = random_ppp(rng, shape, io);
                    for_constraints = &p->density;
                } else {
                    m = random_pmbm(rng, shape, io);
                    for_constraints = &m->ppp.density;
                }
                std::optional<std::size_t> n_constraints;
                const auto mode = pick_mode(oc.random_mode, rng, n_constraints);
                cs = random_constraint_set(rng, *for_constraints, mode, io, n_constraints);
            }

            OracleReport rep;
            if (oc.type == "bernoulli") {
                auto c = constrain_bernoulli(*b, *cs, opts.engine);
                corrupt(c, config.scale_constrained_existence);
                rep = oracle_bernoulli(*b, c, *cs, opts);
            } else if (oc.type == "ppp") {
                auto c = constrain_ppp(*p, *cs, opts.engine);
                corrupt(c, config.scale_constrained_existence);
                rep = oracle_ppp(*p, c, *cs, opts);
            } else {
                auto c = constrain_pmbm(*m, *cs, opts.engine);
                corrupt(c.ppp, config.scale_constrained_existence);
                for (auto& h : c.hypotheses)
                    for (auto& t : h.tracks) corrupt(t, config.scale_constrained_existence);
                rep = oracle_pmbm(*m, c, *cs, opts);
            }
            log << "oracle " << oc.name << "[" << k << "] " << rep.subject << ": "
                << (rep.passed() ? "pass" : "FAIL") << " (" << rep.failures() << " of " << rep.entries.size()
                << " checks failed)\n";
            runs.push_back({oc.name, k, std::move(rep)});
        }
    }

    Json reports = Json::array();
    std::ofstream table(out_dir / "oracle_report.txt", std::ios::binary);
    bool all = true;
    std::size_t failures = 0;
    for (const auto& r : runs) {
        Json j = oracle_report_to_json(r.report);
        j["case"] = r.case_name;
        j["instance"] = r.instance;
        reports.push_back(std::move(j));
        table << "[" << r.case_name << " #" << r.instance << "]\n" << format_table(r.report) << "\n";
        all = all && r.report.passed();
        failures += r.report.failures();
    }
    table << (all ? "OVERALL PASS" : "OVERALL FAIL") << "\n";
    write_json(out_dir / "oracle_report.json",
               {{"seed", config.common.seed}, {"passed", all}, {"failures", failures}, {"reports", std::move(reports)}});
    return runs;
}

int run(const std::string& command, const RunOptions& options, std::ostream& out, std::ostream& err) {
    Json doc;
    std::optional<SimulateConfig> sim;
    std::optional<ConstrainConfig> con;
    std::optional<OracleConfig> ora;
    try {
        doc = load_json_file(options.config);
        if (doc.contains("command") && doc["command"] != command) {
            throw SchemaError("/command", "config is for \"" + doc["command"].dump() + "\", not \"" + command + "\"");
        }
        if (command == "simulate") {
            sim = parse_simulate(doc);
        } else if (command == "constrain") {
            con = parse_constrain(doc, options.config.parent_path());
        } else if (command == "oracle") {
            ora = parse_oracle(doc);
        } else {
            throw ConfigError("unknown command '" + command + "'");
        }
    } catch (const SchemaError& e) {
        err << options.config.string() << ": " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        err << e.what() << "\n";
        return kConfigError;
    }

    Common* common = sim ? &sim->common : con ? &con->common : &ora->common;
    if (options.seed) common->seed = *options.seed;
    const fs::path out_dir = options.out_dir ? *options.out_dir : fs::path(common->out_dir.value_or("out"));
    std::ostream null_log(nullptr);
    std::ostream& log = options.verbose ? err : null_log;

    try {
        if (sim) {
            cmd_simulate(*sim, out_dir, out);
        } else if (con) {
            cmd_constrain(*con, out_dir, out);
        } else {
            const auto runs = cmd_oracle(*ora, out_dir, log);
            std::size_t failed = 0;
            for (const auto& r : runs) failed += r.report.passed() ? 0 : 1;
            out << "oracle: " << runs.size() - failed << " of " << runs.size() << " reports passed -> "
                << (out_dir / "oracle_report.json").string() << "\n";
            if (failed > 0) return kOracleFailure;
        }
    } catch (const ConfigError& e) {
        err << options.config.string() << ": " << e.what() << "\n";
        return kConfigError;
    } catch (const SchemaError& e) {
        err << e.what() << "\n";
        return kConfigError;
    } catch (const ZeroSupportError& e) {
        err << "zero temporal support: " << e.what() << "\n";
        return kNumericalError;
    } catch (const PartitionBudgetError& e) {
        err << "partition budget exceeded: " << e.what() << "\n";
        return kNumericalError;
    } catch (const AcceptanceRateError& e) {
        err << "rejection sampling: " << e.what() << "\n";
        return kNumericalError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kNumericalError;
    }
    return kSuccess;
}

}  // namespace trajcon::cli
