#include "trajcon/io.hpp"

#include <cmath>
#include <limits>

namespace trajcon {
namespace {

std::string child(const std::string& pointer, const std::string& key) { return pointer + "/" + key; }
std::string child(const std::string& pointer, std::size_t i) { return pointer + "/" + std::to_string(i); }

const Json& require_array(const Json& j, const std::string& pointer) {
    if (!j.is_array()) throw SchemaError(pointer, "expected an array");
    return j;
}

const Json& require_object(const Json& j, const std::string& pointer) {
    if (!j.is_object()) throw SchemaError(pointer, "expected an object");
    return j;
}

template <class F>
auto wrap(const std::string& pointer, F&& f) {
    try {
        return f();
    } catch (const SchemaError&) {
        throw;
    } catch (const std::exception& e) {
        throw SchemaError(pointer, e.what());
    }
}

void check_schema(const Json& j, const std::string& name, const std::string& pointer) {
    if (!j.contains("schema")) return;
    if (string_from_json(j["schema"], child(pointer, "schema")) != name) {
        throw SchemaError(child(pointer, "schema"), "expected \"" + name + "\"");
    }
    if (j.contains("version")) {
        const auto v = integer_from_json(j["version"], child(pointer, "version"));
        if (v != kSchemaVersion) {
            throw SchemaError(child(pointer, "version"), "unsupported version " + std::to_string(v));
        }
    }
}

Json estimate_to_json(const Estimate& e) { return {{"value", e.value}, {"std_error", e.std_error}}; }

Estimate estimate_from_json(const Json& j, const std::string& p) {
    require_object(j, p);
    return {number_from_json(require_field(j, "value", p), child(p, "value")),
            number_from_json(require_field(j, "std_error", p), child(p, "std_error"))};
}

ConstraintReport report_from_json(const Json& j, const std::string& p) {
    require_object(j, p);
    return {estimate_from_json(require_field(j, "prob_alive", p), child(p, "prob_alive")),
            estimate_from_json(require_field(j, "prob_spatial", p), child(p, "prob_spatial")),
            estimate_from_json(require_field(j, "joint", p), child(p, "joint"))};
}

Json truncation_to_json(const Truncation& tr) {
    Json pairs = Json::array();
    for (const auto& pt : tr.pairs) {
        Json parts = Json::array();
        for (const auto& term : pt.partitions) {
            parts.push_back({{"inside_mask", term.inside_mask},
                             {"weight", term.weight},
                             {"raw_weight", term.raw_weight},
                             {"raw_std_error", term.raw_std_error}});
        }
        pairs.push_back({{"active", pt.active.indices},
                         {"acceptance", estimate_to_json(pt.acceptance)},
                         {"partitions", std::move(parts)}});
    }
    return {{"constraints", constraint_set_to_json(tr.constraints)},
            {"pairs", std::move(pairs)},
            {"temporal_pmf", tr.temporal_pmf},
            {"report", report_to_json(tr.report)},
            {"degenerate", tr.degenerate}};
}

Truncation truncation_from_json(const Json& j, const std::string& p) {
    require_object(j, p);
    Truncation tr{constraint_set_from_json(require_field(j, "constraints", p), child(p, "constraints")), {}, {}, {},
                  false};
    const auto pp = child(p, "pairs");
    const auto& pairs = require_array(require_field(j, "pairs", p), pp);
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const auto q = child(pp, k);
        const auto& pj = require_object(pairs[k], q);
        PairTruncation pt;
        const auto aq = child(q, "active");
        const auto& active = require_array(require_field(pj, "active", q), aq);
        for (std::size_t i = 0; i < active.size(); ++i) {
            const auto idx = integer_from_json(active[i], child(aq, i));
            if (idx < 0 || static_cast<std::size_t>(idx) >= tr.constraints.size()) {
                throw SchemaError(child(aq, i), "constraint index out of range");
            }
            pt.active.indices.push_back(static_cast<std::size_t>(idx));
            pt.active.times.push_back(tr.constraints[static_cast<std::size_t>(idx)].time);
        }
        pt.acceptance = estimate_from_json(require_field(pj, "acceptance", q), child(q, "acceptance"));
        const auto partq = child(q, "partitions");
        const auto& parts = require_array(require_field(pj, "partitions", q), partq);
        for (std::size_t i = 0; i < parts.size(); ++i) {
            const auto tq = child(partq, i);
            require_object(parts[i], tq);
            PartitionTerm term;
            const auto mask = integer_from_json(require_field(parts[i], "inside_mask", tq), child(tq, "inside_mask"));
            if (mask <= 0 || mask >= (std::int64_t{1} << pt.active.size())) {
                throw SchemaError(child(tq, "inside_mask"), "mask does not match the active constraints");
            }
            term.inside_mask = static_cast<std::uint32_t>(mask);
            term.weight = number_from_json(require_field(parts[i], "weight", tq), child(tq, "weight"));
            term.raw_weight = number_from_json(require_field(parts[i], "raw_weight", tq), child(tq, "raw_weight"));
            term.raw_std_error =
                number_from_json(require_field(parts[i], "raw_std_error", tq), child(tq, "raw_std_error"));
            pt.partitions.push_back(term);
        }
        tr.pairs.push_back(std::move(pt));
    }
    const auto tq = child(p, "temporal_pmf");
    const auto& tp = require_array(require_field(j, "temporal_pmf", p), tq);
    for (std::size_t i = 0; i < tp.size(); ++i) tr.temporal_pmf.push_back(number_from_json(tp[i], child(tq, i)));
    tr.report = report_from_json(require_field(j, "report", p), child(p, "report"));
    tr.degenerate = bool_from_json(require_field(j, "degenerate", p), child(p, "degenerate"));
    return tr;
}

void require_empty_issues(const std::vector<std::string>& issues, const std::string& pointer) {
    if (issues.empty()) return;
    std::string msg = issues.front();
    for (std::size_t i = 1; i < issues.size(); ++i) msg += "; " + issues[i];
    throw SchemaError(pointer, msg);
}

}  // namespace

const Json& require_field(const Json& j, const std::string& key, const std::string& pointer) {
    require_object(j, pointer);
    const auto it = j.find(key);
    if (it == j.end()) throw SchemaError(child(pointer, key), "missing required field");
    return *it;
}

double number_from_json(const Json& j, const std::string& pointer) {
    if (!j.is_number()) throw SchemaError(pointer, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw SchemaError(pointer, "expected a finite number");
    return v;
}

std::int64_t integer_from_json(const Json& j, const std::string& pointer) {
    if (!j.is_number_integer()) throw SchemaError(pointer, "expected an integer");
    if (j.is_number_unsigned() && j.get<std::uint64_t>() > static_cast<std::uint64_t>(
                                                             std::numeric_limits<std::int64_t>::max())) {
        throw SchemaError(pointer, "integer out of range");
    }
    return j.get<std::int64_t>();
}

bool bool_from_json(const Json& j, const std::string& pointer) {
    if (!j.is_boolean()) throw SchemaError(pointer, "expected true or false");
    return j.get<bool>();
}

std::string string_from_json(const Json& j, const std::string& pointer) {
    if (!j.is_string()) throw SchemaError(pointer, "expected a string");
    return j.get<std::string>();
}

double probability_from_json(const Json& j, const std::string& pointer) {
    const double v = number_from_json(j, pointer);
    if (v < 0.0 || v > 1.0) throw SchemaError(pointer, "probability outside [0,1]");
    return v;
}

Json matrix_to_json(const Eigen::MatrixXd& m) {
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const Json& j, const std::string& pointer) {
    require_array(j, pointer);
    if (j.empty()) return {};
    const auto rows = j.size();
    const auto cols = require_array(j[0], child(pointer, std::size_t{0})).size();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        const auto rp = child(pointer, r);
        const auto& row = require_array(j[r], rp);
        if (row.size() != cols) throw SchemaError(rp, "rows must all have " + std::to_string(cols) + " entries");
        for (std::size_t c = 0; c < cols; ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = number_from_json(row[c], child(rp, c));
        }
    }
    return m;
}

Json vector_to_json(const Eigen::VectorXd& v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

Eigen::VectorXd vector_from_json(const Json& j, const std::string& pointer) {
    require_array(j, pointer);
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = number_from_json(j[i], child(pointer, i));
    return v;
}

Json box_to_json(const Box& box) {
    Json out = Json::array();
    for (const auto& iv : box.intervals()) {
        out.push_back(Json::array({iv.lower ? Json(*iv.lower) : Json(nullptr), iv.upper ? Json(*iv.upper) : Json(nullptr)}));
    }
    return out;
}

Box box_from_json(const Json& j, const std::string& pointer) {
    require_array(j, pointer);
    if (j.empty()) throw SchemaError(pointer, "a box needs at least one dimension");
    std::vector<Interval> ivs;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto p = child(pointer, i);
        const auto& iv = require_array(j[i], p);
        if (iv.size() != 2) throw SchemaError(p, "expected [lower, upper] with null for unbounded");
        Interval out;
        if (!iv[0].is_null()) out.lower = number_from_json(iv[0], child(p, std::size_t{0}));
        if (!iv[1].is_null()) out.upper = number_from_json(iv[1], child(p, std::size_t{1}));
        if (out.lower && out.upper && !(*out.lower < *out.upper)) {
            throw SchemaError(p, "lower bound must be below upper bound");
        }
        ivs.push_back(out);
    }
    return Box(std::move(ivs));
}

Json region_to_json(const StateRegion& region) {
    Json out = Json::array();
    for (const auto& b : region.boxes()) out.push_back(box_to_json(b));
    return out;
}

StateRegion region_from_json(const Json& j, const std::string& pointer) {
    require_array(j, pointer);
    if (j.empty()) throw SchemaError(pointer, "a region needs at least one box");
    std::vector<Box> boxes;
    for (std::size_t i = 0; i < j.size(); ++i) boxes.push_back(box_from_json(j[i], child(pointer, i)));
    return wrap(pointer, [&] { return StateRegion(std::move(boxes)); });
}

Json constraint_set_to_json(const ConstraintSet& cs) {
    Json list = Json::array();
    for (const auto& c : cs.constraints()) list.push_back({{"time", c.time}, {"region", region_to_json(c.region)}});
    return {{"mode", cs.mode() == ConstraintMode::conjunct ? "conjunct" : "disjunct"}, {"constraints", std::move(list)}};
}

ConstraintSet constraint_set_from_json(const Json& j, const std::string& pointer) {
    require_object(j, pointer);
    ConstraintMode mode = ConstraintMode::conjunct;
    if (j.contains("mode")) {
        const auto m = string_from_json(j["mode"], child(pointer, "mode"));
        if (m == "conjunct" || m == "single") {
            mode = ConstraintMode::conjunct;
        } else if (m == "disjunct") {
            mode = ConstraintMode::disjunct;
        } else {
            throw SchemaError(child(pointer, "mode"), "expected \"single\", \"conjunct\" or \"disjunct\"");
        }
    }
    const auto lp = child(pointer, "constraints");
    const auto& list = require_array(require_field(j, "constraints", pointer), lp);
    if (list.empty()) throw SchemaError(lp, "a constraint set needs at least one constraint");
    if (j.contains("mode") && j["mode"] == "single" && list.size() != 1) {
        throw SchemaError(lp, "mode \"single\" takes exactly one constraint");
    }
    std::vector<Constraint> cs;
    for (std::size_t i = 0; i < list.size(); ++i) {
        const auto p = child(lp, i);
        cs.push_back({integer_from_json(require_field(list[i], "time", p), child(p, "time")),
                      region_from_json(require_field(list[i], "region", p), child(p, "region"))});
    }
    return wrap(lp, [&] { return ConstraintSet(std::move(cs), mode); });
}

Json gaussian_to_json(const GaussianSequence& gs) {
    return {{"state_dim", gs.state_dim}, {"mean", vector_to_json(gs.mean)}, {"covariance", matrix_to_json(gs.covariance)}};
}

GaussianSequence gaussian_from_json(const Json& j, const std::string& pointer) {
    require_object(j, pointer);
    GaussianSequence gs;
    const auto d = integer_from_json(require_field(j, "state_dim", pointer), child(pointer, "state_dim"));
    if (d < 1) throw SchemaError(child(pointer, "state_dim"), "must be at least 1");
    gs.state_dim = static_cast<std::size_t>(d);
    gs.mean = vector_from_json(require_field(j, "mean", pointer), child(pointer, "mean"));
    gs.covariance = matrix_from_json(require_field(j, "covariance", pointer), child(pointer, "covariance"));
    require_empty_issues(check_gaussian(gs), pointer);
    return gs;
}

Json density_to_json(const TrajectoryDensity& td) {
    Json pmf = Json::array();
    for (const auto& e : td.pmf.entries) {
        pmf.push_back({{"birth", e.lifetime.birth}, {"death", e.lifetime.death}, {"probability", e.probability}});
    }
    Json conds = Json::array();
    for (const auto& gs : td.conditionals) conds.push_back(gaussian_to_json(gs));
    Json out = {{"pmf", std::move(pmf)}, {"conditionals", std::move(conds)}};
    if (td.truncation) out["truncation"] = truncation_to_json(*td.truncation);
    return out;
}

TrajectoryDensity density_from_json(const Json& j, const std::string& pointer) {
    require_object(j, pointer);
    TrajectoryDensity td;
    const auto pp = child(pointer, "pmf");
    const auto& pmf = require_array(require_field(j, "pmf", pointer), pp);
    for (std::size_t i = 0; i < pmf.size(); ++i) {
        const auto p = child(pp, i);
        const Lifetime lt{integer_from_json(require_field(pmf[i], "birth", p), child(p, "birth")),
                          integer_from_json(require_field(pmf[i], "death", p), child(p, "death"))};
        if (lt.death < lt.birth) throw SchemaError(p, "death before birth");
        td.pmf.entries.push_back(
            {lt, probability_from_json(require_field(pmf[i], "probability", p), child(p, "probability"))});
    }
    const auto cp = child(pointer, "conditionals");
    const auto& conds = require_array(require_field(j, "conditionals", pointer), cp);
    if (conds.size() != pmf.size()) throw SchemaError(cp, "need one conditional per pmf entry");
    for (std::size_t i = 0; i < conds.size(); ++i) {
        td.conditionals.push_back(gaussian_from_json(conds[i], child(cp, i)));
        const auto expected = td.pmf.entries[i].lifetime.length() * td.conditionals.back().state_dim;
        if (static_cast<std::size_t>(td.conditionals.back().mean.size()) != expected) {
            throw SchemaError(child(cp, i), "mean length must be lifetime length times state_dim = " +
                                                std::to_string(expected));
        }
    }
    if (j.contains("truncation")) {
        td.truncation = truncation_from_json(j["truncation"], child(pointer, "truncation"));
    }
    require_empty_issues(check_density(td), pointer);
    return td;
}

Json bernoulli_to_json(const BernoulliTrajectory& b) {
    return {{"r", b.r}, {"degenerate", b.degenerate}, {"density", density_to_json(b.density)}};
}

BernoulliTrajectory bernoulli_from_json(const Json& j, const std::string& pointer) {
    BernoulliTrajectory b;
    b.r = probability_from_json(require_field(j, "r", pointer), child(pointer, "r"));
    if (j.contains("degenerate")) b.degenerate = bool_from_json(j["degenerate"], child(pointer, "degenerate"));
    b.density = density_from_json(require_field(j, "density", pointer), child(pointer, "density"));
    require_empty_issues(validate(b), pointer);
    return b;
}

Json ppp_to_json(const PppTrajectory& p) {
    return {{"mu", p.mu}, {"degenerate", p.degenerate}, {"density", density_to_json(p.density)}};
}

PppTrajectory ppp_from_json(const Json& j, const std::string& pointer) {
    PppTrajectory p;
    p.mu = number_from_json(require_field(j, "mu", pointer), child(pointer, "mu"));
    if (j.contains("degenerate")) p.degenerate = bool_from_json(j["degenerate"], child(pointer, "degenerate"));
    p.density = density_from_json(require_field(j, "density", pointer), child(pointer, "density"));
    require_empty_issues(validate(p), pointer);
    return p;
}

Json pmbm_to_json(const PmbmDensity& m) {
    Json hyps = Json::array();
    for (const auto& h : m.hypotheses) {
        Json tracks = Json::array();
        for (const auto& b : h.tracks) tracks.push_back(bernoulli_to_json(b));
        hyps.push_back({{"weight", h.weight}, {"tracks", std::move(tracks)}});
    }
    return {{"schema", "trajcon.pmbm"},
            {"version", kSchemaVersion},
            {"ppp", ppp_to_json(m.ppp)},
            {"hypotheses", std::move(hyps)}};
}

PmbmDensity pmbm_from_json(const Json& j, const std::string& pointer) {
    require_object(j, pointer);
    check_schema(j, "trajcon.pmbm", pointer);
    PmbmDensity m;
    m.ppp = ppp_from_json(require_field(j, "ppp", pointer), child(pointer, "ppp"));
    const auto hp = child(pointer, "hypotheses");
    const auto& hyps = require_array(require_field(j, "hypotheses", pointer), hp);
    for (std::size_t a = 0; a < hyps.size(); ++a) {
        const auto p = child(hp, a);
        GlobalHypothesis gh;
        gh.weight = probability_from_json(require_field(hyps[a], "weight", p), child(p, "weight"));
        const auto tp = child(p, "tracks");
        const auto& tracks = require_array(require_field(hyps[a], "tracks", p), tp);
        for (std::size_t i = 0; i < tracks.size(); ++i) gh.tracks.push_back(bernoulli_from_json(tracks[i], child(tp, i)));
        m.hypotheses.push_back(std::move(gh));
    }
    require_empty_issues(validate(m), pointer);
    return m;
}

Json trajectory_to_json(const Trajectory& t) {
    Json states = Json::array();
    for (Eigen::Index k = 0; k < t.states().cols(); ++k) states.push_back(vector_to_json(t.states().col(k)));
    return {{"birth", t.birth()}, {"death", t.death()}, {"states", std::move(states)}};
}

Trajectory trajectory_from_json(const Json& j, const std::string& pointer) {
    const Lifetime lt{integer_from_json(require_field(j, "birth", pointer), child(pointer, "birth")),
                      integer_from_json(require_field(j, "death", pointer), child(pointer, "death"))};
    const auto sp = child(pointer, "states");
    const Eigen::MatrixXd rows = matrix_from_json(require_field(j, "states", pointer), sp);
    return wrap(sp, [&] { return Trajectory(lt, rows.transpose()); });
}

Json scenario_to_json(const Scenario& s) {
    Json truth = Json::array();
    for (const auto& t : s.truth) truth.push_back(trajectory_to_json(t));
    Json scans = Json::array();
    for (const auto& scan : s.scans) {
        Json ms = Json::array();
        for (const auto& m : scan.measurements) {
            ms.push_back({{"z", vector_to_json(m.z)}, {"truth", m.truth_index ? Json(*m.truth_index) : Json(nullptr)}});
        }
        scans.push_back({{"time", scan.time}, {"measurements", std::move(ms)}});
    }
    return {{"schema", "trajcon.scenario"},
            {"version", kSchemaVersion},
            {"window", {{"alpha", s.window.alpha()}, {"gamma", s.window.gamma()}}},
            {"truth", std::move(truth)},
            {"scans", std::move(scans)}};
}

Scenario scenario_from_json(const Json& j, const std::string& pointer) {
    require_object(j, pointer);
    check_schema(j, "trajcon.scenario", pointer);
    const auto wp = child(pointer, "window");
    const auto& w = require_field(j, "window", pointer);
    const Time alpha = integer_from_json(require_field(w, "alpha", wp), child(wp, "alpha"));
    const Time gamma = integer_from_json(require_field(w, "gamma", wp), child(wp, "gamma"));
    Scenario s{wrap(wp, [&] { return TimeWindow(alpha, gamma); }), {}, {}};
    const auto tp = child(pointer, "truth");
    const auto& truth = require_array(require_field(j, "truth", pointer), tp);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        s.truth.push_back(trajectory_from_json(truth[i], child(tp, i)));
        const auto& lt = s.truth.back().lifetime();
        if (!s.window.contains(lt.birth) || !s.window.contains(lt.death)) {
            throw SchemaError(child(tp, i), "lifetime outside the window");
        }
    }
    const auto sp = child(pointer, "scans");
    const auto& scans = require_array(require_field(j, "scans", pointer), sp);
    for (std::size_t k = 0; k < scans.size(); ++k) {
        const auto p = child(sp, k);
        MeasurementScan scan;
        scan.time = integer_from_json(require_field(scans[k], "time", p), child(p, "time"));
        const auto mp = child(p, "measurements");
        const auto& ms = require_array(require_field(scans[k], "measurements", p), mp);
        for (std::size_t i = 0; i < ms.size(); ++i) {
            const auto q = child(mp, i);
            Measurement m;
            m.z = vector_from_json(require_field(ms[i], "z", q), child(q, "z"));
            if (ms[i].contains("truth") && !ms[i]["truth"].is_null()) {
                const auto idx = integer_from_json(ms[i]["truth"], child(q, "truth"));
                if (idx < 0 || static_cast<std::size_t>(idx) >= s.truth.size()) {
                    throw SchemaError(child(q, "truth"), "truth index out of range");
                }
                m.truth_index = static_cast<std::size_t>(idx);
            }
            scan.measurements.push_back(std::move(m));
        }
        s.scans.push_back(std::move(scan));
    }
    return s;
}

Json motion_to_json(const MotionModel& mm) {
    Json births = Json::array();
    for (const auto& b : mm.scheduled_births) {
        Json e = {{"time", b.time}};
        if (b.state) e["state"] = vector_to_json(*b.state);
        births.push_back(std::move(e));
    }
    return {{"transition", matrix_to_json(mm.transition)},
            {"process_noise", matrix_to_json(mm.process_noise)},
            {"survival", mm.survival},
            {"birth_rate", mm.birth_rate},
            {"birth_mean", vector_to_json(mm.birth_mean)},
            {"birth_covariance", matrix_to_json(mm.birth_covariance)},
            {"scheduled_births", std::move(births)}};
}

MotionModel motion_from_json(const Json& j, const std::string& pointer) {
    require_object(j, pointer);
    MotionModel mm;
    mm.transition = matrix_from_json(require_field(j, "transition", pointer), child(pointer, "transition"));
    mm.process_noise = matrix_from_json(require_field(j, "process_noise", pointer), child(pointer, "process_noise"));
    mm.survival = probability_from_json(require_field(j, "survival", pointer), child(pointer, "survival"));
    mm.birth_rate = j.contains("birth_rate") ? number_from_json(j["birth_rate"], child(pointer, "birth_rate")) : 0.0;
    mm.birth_mean = vector_from_json(require_field(j, "birth_mean", pointer), child(pointer, "birth_mean"));
    mm.birth_covariance =
        matrix_from_json(require_field(j, "birth_covariance", pointer), child(pointer, "birth_covariance"));
    if (j.contains("scheduled_births")) {
        const auto bp = child(pointer, "scheduled_births");
        const auto& births = require_array(j["scheduled_births"], bp);
        for (std::size_t i = 0; i < births.size(); ++i) {
            const auto p = child(bp, i);
            ScheduledBirth b;
            b.time = integer_from_json(require_field(births[i], "time", p), child(p, "time"));
            if (births[i].contains("state")) b.state = vector_from_json(births[i]["state"], child(p, "state"));
            mm.scheduled_births.push_back(std::move(b));
        }
    }
    require_empty_issues(check_motion(mm), pointer);
    return mm;
}

Json sensor_to_json(const SensorModel& sm) {
    return {{"measurement", matrix_to_json(sm.measurement)},
            {"noise", matrix_to_json(sm.noise)},
            {"detection", sm.detection},
            {"clutter_rate", sm.clutter_rate},
            {"clutter_region", sm.clutter_region ? box_to_json(*sm.clutter_region) : Json(nullptr)}};
}

SensorModel sensor_from_json(const Json& j, const std::string& pointer) {
    require_object(j, pointer);
    SensorModel sm;
    sm.measurement = matrix_from_json(require_field(j, "measurement", pointer), child(pointer, "measurement"));
    sm.noise = matrix_from_json(require_field(j, "noise", pointer), child(pointer, "noise"));
    sm.detection = probability_from_json(require_field(j, "detection", pointer), child(pointer, "detection"));
    sm.clutter_rate =
        j.contains("clutter_rate") ? number_from_json(j["clutter_rate"], child(pointer, "clutter_rate")) : 0.0;
    if (j.contains("clutter_region") && !j["clutter_region"].is_null()) {
        sm.clutter_region = box_from_json(j["clutter_region"], child(pointer, "clutter_region"));
    }
    require_empty_issues(check_sensor(sm, static_cast<std::size_t>(sm.measurement.cols())), pointer);
    return sm;
}

Json report_to_json(const ConstraintReport& r) {
    return {{"prob_alive", estimate_to_json(r.prob_alive)},
            {"prob_spatial", estimate_to_json(r.prob_spatial)},
            {"joint", estimate_to_json(r.joint)}};
}

Json oracle_report_to_json(const OracleReport& r) {
    Json entries = Json::array();
    for (const auto& e : r.entries) {
        entries.push_back({{"name", e.name},
                           {"kind", e.kind},
                           {"analytic", e.analytic},
                           {"empirical", e.empirical},
                           {"std_error", e.std_error},
                           {"z", std::isfinite(e.z) ? Json(e.z) : Json(e.z > 0 ? "inf" : "-inf")},
                           {"tested", e.tested},
                           {"passed", e.passed}});
    }
    return {{"subject", r.subject},
            {"n", r.n},
            {"seed", r.seed},
            {"z_threshold", r.z_threshold},
            {"passed", r.passed()},
            {"failures", r.failures()},
            {"entries", std::move(entries)}};
}

}  // namespace trajcon
