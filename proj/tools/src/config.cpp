#include "config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace trajcon::cli {
namespace {

std::string child(const std::string& p, const std::string& key) { return p + "/" + key; }
std::string child(const std::string& p, std::size_t i) { return p + "/" + std::to_string(i); }

void reject_unknown(const Json& j, const std::string& pointer, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw SchemaError(pointer, "expected an object");
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& [k, v] : j.items()) {
        if (!keys.contains(k)) throw SchemaError(child(pointer, k), "unknown field");
    }
}

std::size_t size_from_json(const Json& j, const std::string& pointer, std::size_t minimum) {
    const auto v = integer_from_json(j, pointer);
    if (v < static_cast<std::int64_t>(minimum)) {
        throw SchemaError(pointer, "must be at least " + std::to_string(minimum));
    }
    return static_cast<std::size_t>(v);
}

std::uint64_t seed_from_json(const Json& j, const std::string& pointer) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
        throw SchemaError(pointer, "expected a nonnegative integer seed");
    }
    return j.get<std::uint64_t>();
}

Common parse_common(const Json& j) {
    Common c;
    if (j.contains("seed")) c.seed = seed_from_json(j["seed"], "/seed");
    if (j.contains("out_dir")) c.out_dir = string_from_json(j["out_dir"], "/out_dir");
    return c;
}

TimeWindow parse_window(const Json& j, const std::string& p) {
    reject_unknown(j, p, {"alpha", "gamma"});
    const Time a = integer_from_json(require_field(j, "alpha", p), child(p, "alpha"));
    const Time g = integer_from_json(require_field(j, "gamma", p), child(p, "gamma"));
    if (a > g) throw SchemaError(p, "alpha must not exceed gamma");
    return TimeWindow(a, g);
}

void check_times(const ConstraintSet& cs, const TimeWindow& w, const std::string& p) {
    for (std::size_t i = 0; i < cs.size(); ++i) {
        if (!w.contains(cs[i].time)) {
            throw SchemaError(p, "constraint time " + std::to_string(cs[i].time) + " outside the window " +
                                     std::to_string(w.alpha()) + ".." + std::to_string(w.gamma()));
        }
    }
}

void check_density_window(const TrajectoryDensity& td, const TimeWindow& w, const std::string& p) {
    for (const auto& e : td.pmf.entries) {
        if (!w.contains(e.lifetime.birth) || !w.contains(e.lifetime.death)) {
            throw SchemaError(p, "lifetime outside the window");
        }
    }
}

NamedConstraintSet parse_named_set(const Json& j, const std::string& p, std::size_t index) {
    reject_unknown(j, p, {"name", "mode", "constraints"});
    NamedConstraintSet out{j.contains("name") ? string_from_json(j["name"], child(p, "name"))
                                              : "set" + std::to_string(index),
                           constraint_set_from_json(j, p)};
    if (out.name.empty() ||
        !std::all_of(out.name.begin(), out.name.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'; })) {
        throw SchemaError(child(p, "name"), "names may only contain letters, digits, '_' and '-'");
    }
    return out;
}

}  // namespace

Json load_json_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path.string() + ": cannot open file");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        // Locate the failing byte for a line:column prefix.
        const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i < end; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError(path.string() + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + e.what());
    }
}

SimulateConfig parse_simulate(const Json& j) {
    reject_unknown(j, "", {"command", "seed", "out_dir", "window", "motion", "sensor"});
    SimulateConfig c;
    c.common = parse_common(j);
    c.window = parse_window(require_field(j, "window", ""), "/window");
    c.motion = motion_from_json(require_field(j, "motion", ""), "/motion");
    c.sensor = sensor_from_json(require_field(j, "sensor", ""), "/sensor");
    if (c.sensor.measurement.cols() != static_cast<Eigen::Index>(c.motion.state_dim())) {
        throw SchemaError("/sensor/measurement", "needs one column per state dimension");
    }
    for (std::size_t i = 0; i < c.motion.scheduled_births.size(); ++i) {
        if (!c.window.contains(c.motion.scheduled_births[i].time)) {
            throw SchemaError("/motion/scheduled_births/" + std::to_string(i) + "/time", "outside the window");
        }
    }
    return c;
}

ConstrainConfig parse_constrain(const Json& j, const std::filesystem::path& base_dir) {
    reject_unknown(j, "", {"command", "seed", "out_dir", "window", "motion", "sensor", "track", "bernoulli", "ppp",
                           "constraint_sets", "mc"});
    ConstrainConfig c;
    c.common = parse_common(j);
    if (j.contains("window")) c.window = parse_window(j["window"], "/window");
    if (j.contains("motion")) c.motion = motion_from_json(j["motion"], "/motion");
    if (j.contains("sensor")) c.sensor = sensor_from_json(j["sensor"], "/sensor");

    const int sources = static_cast<int>(j.contains("track")) + static_cast<int>(j.contains("bernoulli")) +
                        static_cast<int>(j.contains("ppp"));
    if (sources != 1) throw SchemaError("", "exactly one of \"track\", \"bernoulli\" or \"ppp\" is required");

    if (j.contains("track")) {
        const std::string p = "/track";
        const auto& t = j["track"];
        reject_unknown(t, p, {"measurements", "scenario", "simulate", "truth_index", "r0", "slack"});
        if (!c.window || !c.motion || !c.sensor) {
            throw SchemaError(p, "fitting a track needs \"window\", \"motion\" and \"sensor\"");
        }
        if (c.sensor->measurement.cols() != static_cast<Eigen::Index>(c.motion->state_dim())) {
            throw SchemaError("/sensor/measurement", "needs one column per state dimension");
        }
        TrackSpec spec;
        const int kinds = static_cast<int>(t.contains("measurements")) + static_cast<int>(t.contains("scenario")) +
                          static_cast<int>(t.contains("simulate"));
        if (kinds != 1) throw SchemaError(p, "exactly one of \"measurements\", \"scenario\" or \"simulate\"");
        if (t.contains("measurements")) {
            spec.source = TrackSpec::Source::measurements;
            const auto mp = child(p, "measurements");
            const auto& ms = t["measurements"];
            if (!ms.is_array() || ms.empty()) throw SchemaError(mp, "expected a nonempty array");
            for (std::size_t i = 0; i < ms.size(); ++i) {
                const auto q = child(mp, i);
                TimedMeasurement m{integer_from_json(require_field(ms[i], "time", q), child(q, "time")),
                                   vector_from_json(require_field(ms[i], "z", q), child(q, "z"))};
                if (!c.window->contains(m.time)) throw SchemaError(child(q, "time"), "outside the window");
                if (m.z.size() != c.sensor->measurement.rows()) throw SchemaError(child(q, "z"), "wrong dimension");
                if (i > 0 && m.time <= spec.measurements.back().time) {
                    throw SchemaError(child(q, "time"), "times must be strictly increasing");
                }
                spec.measurements.push_back(std::move(m));
            }
        } else if (t.contains("scenario")) {
            spec.source = TrackSpec::Source::scenario_file;
            spec.scenario_path = base_dir / string_from_json(t["scenario"], child(p, "scenario"));
        } else {
            spec.source = TrackSpec::Source::simulate;
            if (!t["simulate"].is_boolean() || !t["simulate"].get<bool>()) {
                throw SchemaError(child(p, "simulate"), "expected true");
            }
        }
        if (t.contains("truth_index")) spec.truth_index = size_from_json(t["truth_index"], child(p, "truth_index"), 0);
        spec.r0 = probability_from_json(require_field(t, "r0", p), child(p, "r0"));
        if (t.contains("slack")) spec.slack = size_from_json(t["slack"], child(p, "slack"), 0);
        c.track = std::move(spec);
    } else if (j.contains("bernoulli")) {
        c.bernoulli = bernoulli_from_json(j["bernoulli"], "/bernoulli");
        if (c.bernoulli->density.constrained()) throw SchemaError("/bernoulli", "input must be unconstrained");
        if (c.window) check_density_window(c.bernoulli->density, *c.window, "/bernoulli/density");
    } else {
        c.ppp = ppp_from_json(j["ppp"], "/ppp");
        if (c.ppp->density.constrained()) throw SchemaError("/ppp", "input must be unconstrained");
        if (c.window) check_density_window(c.ppp->density, *c.window, "/ppp/density");
    }

    const std::string sp = "/constraint_sets";
    const auto& sets = require_field(j, "constraint_sets", "");
    if (!sets.is_array() || sets.empty()) throw SchemaError(sp, "expected a nonempty array");
    std::set<std::string> names;
    const std::size_t dim = c.motion ? c.motion->state_dim()
                            : c.bernoulli ? c.bernoulli->density.state_dim()
                                          : c.ppp->density.state_dim();
    for (std::size_t i = 0; i < sets.size(); ++i) {
        const auto q = child(sp, i);
        auto ns = parse_named_set(sets[i], q, i);
        if (!names.insert(ns.name).second) throw SchemaError(child(q, "name"), "duplicate set name");
        if (ns.set.state_dim() != dim) {
            throw SchemaError(q, "regions have dimension " + std::to_string(ns.set.state_dim()) +
                                     ", state dimension is " + std::to_string(dim));
        }
        if (c.window) check_times(ns.set, *c.window, child(q, "constraints"));
        c.sets.push_back(std::move(ns));
    }

    if (j.contains("mc")) {
        const auto& mc = j["mc"];
        reject_unknown(mc, "/mc", {"budget", "marginal_budget"});
        if (mc.contains("budget")) c.budget = size_from_json(mc["budget"], "/mc/budget", 1);
        if (mc.contains("marginal_budget")) {
            c.marginal_budget = size_from_json(mc["marginal_budget"], "/mc/marginal_budget", 1);
        }
    }
    return c;
}

OracleConfig parse_oracle(const Json& j) {
    reject_unknown(j, "", {"command", "seed", "out_dir", "oracle", "testing"});
    OracleConfig c;
    c.common = parse_common(j);
    const std::string p = "/oracle";
    const auto& o = require_field(j, "oracle", "");
    reject_unknown(o, p, {"n", "z_threshold", "engine_budget", "check_moments", "cases"});
    if (o.contains("n")) c.n = size_from_json(o["n"], child(p, "n"), 1000);
    if (o.contains("z_threshold")) {
        c.z_threshold = number_from_json(o["z_threshold"], child(p, "z_threshold"));
        if (!(c.z_threshold > 0.0)) throw SchemaError(child(p, "z_threshold"), "must be positive");
    }
    if (o.contains("engine_budget")) c.engine_budget = size_from_json(o["engine_budget"], child(p, "engine_budget"), 1);
    if (o.contains("check_moments")) c.check_moments = bool_from_json(o["check_moments"], child(p, "check_moments"));

    const auto cp = child(p, "cases");
    const auto& cases = require_field(o, "cases", p);
    if (!cases.is_array() || cases.empty()) throw SchemaError(cp, "expected a nonempty array");
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const auto q = child(cp, i);
        const auto& cj = cases[i];
        reject_unknown(cj, q, {"name", "type", "bernoulli", "ppp", "pmbm", "constraints", "random", "n"});
        OracleCase oc;
        oc.name = cj.contains("name") ? string_from_json(cj["name"], child(q, "name")) : "case" + std::to_string(i);
        oc.type = string_from_json(require_field(cj, "type", q), child(q, "type"));
        if (oc.type != "bernoulli" && oc.type != "ppp" && oc.type != "pmbm") {
            throw SchemaError(child(q, "type"), "expected \"bernoulli\", \"ppp\" or \"pmbm\"");
        }
        if (cj.contains("n")) oc.n = size_from_json(cj["n"], child(q, "n"), 1000);
        if (cj.contains("random")) {
            if (cj.contains(oc.type) || cj.contains("constraints")) {
                throw SchemaError(child(q, "random"), "a case is either random or explicit, not both");
            }
            const auto rp = child(q, "random");
            const auto& r = cj["random"];
            reject_unknown(r, rp, {"count", "mode", "max_state_dim", "max_window", "max_constraints"});
            oc.random_count = r.contains("count") ? size_from_json(r["count"], child(rp, "count"), 1) : 1;
            if (r.contains("mode")) {
                oc.random_mode = string_from_json(r["mode"], child(rp, "mode"));
                if (oc.random_mode != "single" && oc.random_mode != "conjunct" && oc.random_mode != "disjunct" &&
                    oc.random_mode != "any") {
                    throw SchemaError(child(rp, "mode"), "expected \"single\", \"conjunct\", \"disjunct\" or \"any\"");
                }
            }
            if (r.contains("max_state_dim")) oc.max_state_dim = size_from_json(r["max_state_dim"], child(rp, "max_state_dim"), 1);
            if (r.contains("max_window")) oc.max_window = size_from_json(r["max_window"], child(rp, "max_window"), 1);
            if (r.contains("max_constraints")) {
                oc.max_constraints = size_from_json(r["max_constraints"], child(rp, "max_constraints"), 1);
            }
        } else {
            if (!cj.contains(oc.type)) {
                throw SchemaError(q, "needs either \"random\" or an explicit \"" + oc.type + "\" object");
            }
            const auto op = child(q, oc.type);
            std::size_t dim = 0;
            if (oc.type == "bernoulli") {
                oc.bernoulli = bernoulli_from_json(cj["bernoulli"], op);
                dim = oc.bernoulli->density.state_dim();
            } else if (oc.type == "ppp") {
                oc.ppp = ppp_from_json(cj["ppp"], op);
                dim = oc.ppp->density.state_dim();
            } else {
                oc.pmbm = pmbm_from_json(cj["pmbm"], op);
                dim = oc.pmbm->state_dim();
            }
            oc.constraints = constraint_set_from_json(require_field(cj, "constraints", q), child(q, "constraints"));
            if (oc.constraints->state_dim() != dim) {
                throw SchemaError(child(q, "constraints"), "region dimension does not match the state dimension");
            }
        }
        c.cases.push_back(std::move(oc));
    }

    if (j.contains("testing")) {
        const auto& t = j["testing"];
        reject_unknown(t, "/testing", {"scale_constrained_existence"});
        if (t.contains("scale_constrained_existence")) {
            c.scale_constrained_existence =
                number_from_json(t["scale_constrained_existence"], "/testing/scale_constrained_existence");
            if (!(*c.scale_constrained_existence > 0.0)) {
                throw SchemaError("/testing/scale_constrained_existence", "must be positive");
            }
        }
    }
    return c;
}

}  // namespace trajcon::cli
