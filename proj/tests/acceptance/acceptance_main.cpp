// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Every run uses fixed seeds and is reproducible.

#include "test_support.hpp"

#include <trajcon/constrain.hpp>
#include <trajcon/instances.hpp>
#include <trajcon/rfs.hpp>

#ifdef TRAJCON_HAVE_CLI
#include "commands.hpp"
#endif

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>

using namespace trajcon;
using namespace trajcon::testing;

namespace {

struct Outcome {
    bool passed = true;
    std::string detail;
};

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

ConstraintMode mode_of(int m) { return m == 2 ? ConstraintMode::disjunct : ConstraintMode::conjunct; }
const char* mode_name(int m) { return m == 0 ? "single" : m == 1 ? "conjunct" : "disjunct"; }

/// Mode 0 is a one-constraint set; 1 and 2 use 1..4 constraints.
ConstraintSet constraint_set_for(Rng& rng, const TrajectoryDensity& td, int m) {
    return m == 0 ? random_constraint_set(rng, td, ConstraintMode::conjunct, {}, 1)
                  : random_constraint_set(rng, td, mode_of(m));
}

double pmf_total(const BirthDeathPmf& pmf) {
    double s = 0.0;
    for (const auto& e : pmf.entries) s += e.probability;
    return s;
}

// 1. Constrained pmf sums to one; the constrained density integrates to one.
// The integral is estimated by importance sampling from the base density:
// p^C(X) / p(X) = 1{X satisfies C} / Z.
Outcome normalization() {
    constexpr int kInstances = 50;
    constexpr std::size_t kBudget = 100000;
    Rng rng(101);
    Outcome out;
    int checked = 0;
    int degenerate = 0;
    double worst_pmf = 0.0;
    double worst_z = 0.0;
    for (int i = 0; i < kInstances; ++i) {
        const auto td = random_density(rng, random_shape(rng));
        for (int m = 0; m < 3; ++m) {
            const auto cs = constraint_set_for(rng, td, m);
            const auto seed = derive_seed(101, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(m));
            const auto cd = constrain_density(td, cs, {kBudget, derive_seed(seed, 1), true});
            const double pmf_err = std::abs(pmf_total(cd.density.pmf) - 1.0);
            worst_pmf = std::max(worst_pmf, pmf_err);
            if (pmf_err > 1e-12) {
                out.passed = false;
                out.detail += fmt(" [instance %d %s: pmf sum off by %.3g]", i, mode_name(m), pmf_err);
            }

            const TrajectorySampler base(td);
            Rng draw_rng(derive_seed(seed, 2));
            std::size_t hits = 0;
            for (std::size_t s = 0; s < kBudget; ++s) hits += satisfies(base.draw(draw_rng), cs) ? 1 : 0;
            const auto z = cd.report.joint;
            if (cd.density.truncation->degenerate) {
                ++degenerate;
                if (hits > 0) {
                    out.passed = false;
                    out.detail += fmt(" [instance %d %s: zero mass but %zu hits]", i, mode_name(m), hits);
                }
                continue;
            }
            const double n = static_cast<double>(kBudget);
            const double integral = static_cast<double>(hits) / n / z.value;
            const double se = std::hypot(std::sqrt(z.value * (1.0 - z.value) / n) / z.value, z.std_error / z.value);
            const double dev = se > 0.0 ? std::abs(integral - 1.0) / se : (integral == 1.0 ? 0.0 : INFINITY);
            worst_z = std::max(worst_z, dev);
            ++checked;
            if (!(dev <= 3.0)) {
                out.passed = false;
                out.detail += fmt(" [instance %d %s: integral %.5f, %.2f SE]", i, mode_name(m), integral, dev);
            }
        }
    }
    out.detail = fmt("%d integrals checked, %d zero-mass, max |pmf sum - 1| = %.2g, max deviation %.2f SE",
                     checked, degenerate, worst_pmf, worst_z) +
                 out.detail;
    return out;
}

// 2. Analytic constrained parameters against sampling and tau filtering.
Outcome oracle_equivalence() {
    constexpr int kBernoulli = 100;
    constexpr int kPpp = 30;
    Rng rng(202);
    std::size_t failures = 0;
    std::size_t entries = 0;
    std::size_t untested = 0;
    std::map<std::string, std::size_t> by_kind;
    std::string detail;
    const auto tally = [&](const OracleReport& r, const std::string& label) {
        for (const auto& e : r.entries) {
            if (!e.tested) {
                ++untested;
                continue;
            }
            ++entries;
            if (!e.passed) {
                ++failures;
                ++by_kind[e.kind];
                detail += fmt(" [%s %s: analytic %.5g empirical %.5g z %.2f]", label.c_str(), e.name.c_str(),
                              e.analytic, e.empirical, e.z);
            }
        }
    };
    for (int i = 0; i < kBernoulli + kPpp; ++i) {
        const auto shape = random_shape(rng);
        OracleOptions o;
        o.n = 200000;
        o.z_threshold = 4.0;
        o.seed = derive_seed(202, static_cast<std::uint64_t>(i), 1);
        o.engine = {100000, derive_seed(202, static_cast<std::uint64_t>(i), 2), true};
        o.check_moments = false;
        const int m = i % 3;
        if (i < kBernoulli) {
            const auto b = random_bernoulli(rng, shape);
            tally(oracle_bernoulli(b, constraint_set_for(rng, b.density, m), o),
                  fmt("bernoulli %d %s", i, mode_name(m)));
        } else {
            const auto p = random_ppp(rng, shape);
            tally(oracle_ppp(p, constraint_set_for(rng, p.density, m), o), fmt("ppp %d %s", i - kBernoulli, mode_name(m)));
        }
    }
    Outcome out;
    out.passed = failures <= 1;
    std::string kinds;
    for (const auto& [k, v] : by_kind) kinds += fmt(" %s=%zu", k.c_str(), v);
    out.detail = fmt("%d Bernoulli + %d PPP instances, %zu checks (%zu below the expected-count floor), "
                     "%zu with |z| > 4 (tolerated: 1)",
                     kBernoulli, kPpp, entries, untested, failures) +
                 kinds + detail;
    return out;
}

// 3. Mode identities.
Outcome mode_identities() {
    Rng rng(303);
    Outcome out;
    double worst_exact = 0.0;
    double worst_mc = 0.0;
    int ordering = 0;
    int bounds = 0;
    const auto fail = [&](const std::string& s) {
        out.passed = false;
        out.detail += " [" + s + "]";
    };
    for (int i = 0; i < 50; ++i) {
        const auto shape = random_shape(rng);
        const auto b = random_bernoulli(rng, shape);
        const auto seed = derive_seed(303, static_cast<std::uint64_t>(i));

        // Single-element sets: conjunct and disjunct agree.
        const auto single = random_constraint_set(rng, b.density, ConstraintMode::conjunct, {}, 1);
        const auto single_d = single.with_mode(ConstraintMode::disjunct);
        const McOptions exact{20000, seed, true};
        const auto ce = constrain_bernoulli(b, single, exact);
        const auto de = constrain_bernoulli(b, single_d, exact);
        const double d_exact = std::abs(ce.r - de.r);
        worst_exact = std::max(worst_exact, d_exact);
        const auto ce_rep = ce.degenerate ? ConstraintReport{} : ce.density.truncation->report;
        const auto de_rep = de.degenerate ? ConstraintReport{} : de.density.truncation->report;
        const bool exact_path = ce_rep.joint.std_error == 0.0 && de_rep.joint.std_error == 0.0;
        const double tol = exact_path ? 1e-10 : 3.0 * b.r * std::hypot(ce_rep.joint.std_error, de_rep.joint.std_error);
        if (!(d_exact <= tol)) fail(fmt("single %d: conjunct r %.12g vs disjunct r %.12g", i, ce.r, de.r));

        const McOptions mc_only{20000, seed, false};
        const auto cm = constrain_density(b.density, single, mc_only);
        const auto dm = constrain_density(b.density, single_d, mc_only);
        const double se = std::hypot(cm.report.joint.std_error, dm.report.joint.std_error);
        const double d_mc = std::abs(cm.report.joint.value - dm.report.joint.value);
        worst_mc = std::max(worst_mc, se > 0.0 ? d_mc / se : 0.0);
        if (!(d_mc <= 3.0 * se + 1e-12)) fail(fmt("single %d Monte Carlo: %.6g vs %.6g", i, cm.report.joint.value,
                                                  dm.report.joint.value));

        // Shared multi-constraint sets: conjunct never exceeds disjunct.
        const auto shared = random_constraint_set(rng, b.density, ConstraintMode::conjunct);
        const auto rc = constrain_bernoulli(b, shared, exact);
        const auto rd = constrain_bernoulli(b, shared.with_mode(ConstraintMode::disjunct), exact);
        const double sc = rc.degenerate ? 0.0 : rc.density.truncation->report.joint.std_error;
        const double sd = rd.degenerate ? 0.0 : rd.density.truncation->report.joint.std_error;
        ++ordering;
        if (!(rc.r <= rd.r + 3.0 * b.r * std::hypot(sc, sd) + 1e-15)) {
            fail(fmt("shared %d: conjunct r %.6g > disjunct r %.6g", i, rc.r, rd.r));
        }

        // Constraining never increases r or mu.
        for (const auto* c : {&ce, &de, &rc, &rd}) {
            ++bounds;
            if (!(c->r <= b.r)) fail(fmt("instance %d: r^C %.17g > r %.17g", i, c->r, b.r));
        }
        const auto p = random_ppp(rng, shape);
        for (int m = 0; m < 3; ++m) {
            const auto pc = constrain_ppp(p, constraint_set_for(rng, p.density, m), exact);
            ++bounds;
            if (!(pc.mu <= p.mu)) fail(fmt("instance %d: mu^C %.17g > mu %.17g", i, pc.mu, p.mu));
        }
    }
    out.detail = fmt("50 single-element sets: max exact-path gap %.2g, max Monte Carlo gap %.2f SE; "
                     "%d conjunct/disjunct orderings; %d r^C <= r / mu^C <= mu bounds",
                     worst_exact, worst_mc, ordering, bounds) +
                 out.detail;
    return out;
}

// 4. Window constraints select exactly the lifetimes overlapping the window.
Outcome time_window_equivalence() {
    Rng rng(404);
    std::size_t total = 0;
    std::size_t discrepancies = 0;
    std::size_t kept = 0;
    while (total < 10000) {
        const auto shape = random_shape(rng);
        const auto td = random_density(rng, shape);
        const TrajectorySampler sampler(td);
        std::vector<Trajectory> trajs;
        for (int s = 0; s < 100; ++s) trajs.push_back(sampler.draw(rng));
        const auto a = shape.window.alpha();
        const auto g = shape.window.gamma();
        std::uniform_int_distribution<Time> pick(a - 2, g + 2);
        Time eta = pick(rng);
        Time zeta = pick(rng);
        if (eta > zeta) std::swap(eta, zeta);
        const auto filtered = tau_set(trajs, time_window_constraints(eta, zeta, shape.state_dim));
        std::vector<Trajectory> expected;
        for (const auto& x : trajs) {
            if (x.lifetime().overlaps(eta, zeta)) expected.push_back(x);
        }
        if (filtered != expected) {
            discrepancies += std::max(filtered.size(), expected.size()) - std::min(filtered.size(), expected.size());
            if (filtered.size() == expected.size()) ++discrepancies;
        }
        kept += filtered.size();
        total += trajs.size();
    }
    return {discrepancies == 0, fmt("%zu sampled trajectories, %zu inside windows, %zu discrepancies", total, kept,
                                    discrepancies)};
}

bool same_bits(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

bool same_density(const TrajectoryDensity& a, const TrajectoryDensity& b) {
    if (a.pmf.size() != b.pmf.size()) return false;
    for (std::size_t j = 0; j < a.pmf.size(); ++j) {
        if (a.pmf.entries[j].lifetime != b.pmf.entries[j].lifetime ||
            !same_bits(a.pmf.entries[j].probability, b.pmf.entries[j].probability)) {
            return false;
        }
    }
    return a.conditionals.size() == b.conditionals.size();
}

// 5. Constraining a PMBM keeps the weights and constrains each component.
Outcome pmbm_closure() {
    Rng rng(505);
    Outcome out;
    std::size_t components = 0;
    for (int i = 0; i < 20; ++i) {
        const auto m = random_pmbm(rng, random_shape(rng));
        const auto cs = constraint_set_for(rng, m.ppp.density, i % 3);
        const McOptions mc{20000, derive_seed(505, static_cast<std::uint64_t>(i)), true};
        const auto c = constrain_pmbm(m, cs, mc);
        const auto issues = validate(c);
        if (!issues.empty()) {
            out.passed = false;
            out.detail += fmt(" [instance %d invalid: %s]", i, issues.front().c_str());
        }
        if (c.hypotheses.size() != m.hypotheses.size()) {
            out.passed = false;
            out.detail += fmt(" [instance %d: hypothesis count changed]", i);
            continue;
        }
        const auto ppp = constrain_ppp(m.ppp, cs, mc);
        ++components;
        if (!same_bits(ppp.mu, c.ppp.mu) || !same_density(ppp.density, c.ppp.density)) {
            out.passed = false;
            out.detail += fmt(" [instance %d: PPP differs from direct constraining]", i);
        }
        for (std::size_t a = 0; a < m.hypotheses.size(); ++a) {
            if (!same_bits(c.hypotheses[a].weight, m.hypotheses[a].weight)) {
                out.passed = false;
                out.detail += fmt(" [instance %d: weight %zu changed]", i, a);
            }
            for (std::size_t t = 0; t < m.hypotheses[a].tracks.size(); ++t) {
                const auto direct = constrain_bernoulli(m.hypotheses[a].tracks[t], cs, mc);
                ++components;
                if (!same_bits(direct.r, c.hypotheses[a].tracks[t].r) ||
                    !same_density(direct.density, c.hypotheses[a].tracks[t].density)) {
                    out.passed = false;
                    out.detail += fmt(" [instance %d: track (%zu,%zu) differs]", i, a, t);
                }
            }
        }
    }
    out.detail = fmt("20 PMBM instances, %zu components compared bitwise", components) + out.detail;
    return out;
}

// 6. Disjunct partition weights.
Outcome disjunct_partitions() {
    Rng rng(606);
    Outcome out;
    int pairs = 0;
    double worst_w = 0.0;
    double worst_raw = 0.0;
    int instance = 0;
    while (pairs < 100) {
        const auto td = random_density(rng, random_shape(rng));
        const std::size_t count = 2 + static_cast<std::size_t>(instance % 3);
        const auto cs = random_constraint_set(rng, td, ConstraintMode::disjunct, {}, count);
        const auto seed = derive_seed(606, static_cast<std::uint64_t>(instance++));
        const auto cd = constrain_density(td, cs, {100000, seed, true});
        const auto& tr = *cd.density.truncation;
        for (std::size_t j = 0; j < tr.pairs.size(); ++j) {
            const auto& pt = tr.pairs[j];
            if (pt.active.size() < 2 || pt.active.size() > 4) continue;
            ++pairs;
            double w = 0.0;
            double raw = 0.0;
            for (const auto& term : pt.partitions) {
                w += term.weight;
                raw += term.raw_weight;
            }
            const double w_err = pt.partitions.empty() ? 0.0 : std::abs(w - 1.0);
            worst_w = std::max(worst_w, w_err);
            if (!(w_err <= 1e-10)) {
                out.passed = false;
                out.detail += fmt(" [pair %d: sum w = %.15g]", pairs, w);
            }
            // Independent estimate of Pr(every active constraint violated).
            std::vector<RegionQuery> q;
            for (auto i : pt.active.indices) q.push_back({cs[i].time, cs[i].region, Side::complement});
            const auto none = region_probability(td.conditionals[j], td.pmf.entries[j].lifetime, q,
                                                 {100000, derive_seed(seed, 7, j), true});
            const double se = std::hypot(pt.acceptance.std_error, none.std_error);
            const double gap = std::abs(raw - (1.0 - none.value));
            worst_raw = std::max(worst_raw, se > 0.0 ? gap / se : 0.0);
            if (!(gap <= 3.0 * se + 1e-12)) {
                out.passed = false;
                out.detail += fmt(" [pair %d: sum raw %.6g vs 1 - Pr(none) %.6g, se %.3g]", pairs, raw,
                                  1.0 - none.value, se);
            }
        }
    }

    // Two independent constraints, each holding with probability 1/2.
    const auto td = single_pair_density({0, 1}, iid_sequence({0, 1}));
    const ConstraintSet halves({{0, StateRegion(lower1(0.0))}, {1, StateRegion(lower1(0.0))}},
                               ConstraintMode::disjunct);
    std::string three;
    for (bool allow_exact : {false, true}) {
        const auto cd = constrain_density(td, halves, {1000000, 6060, allow_exact});
        const auto& parts = cd.density.truncation->pairs[0].partitions;
        double worst = parts.size() == 3 ? 0.0 : INFINITY;
        for (const auto& p : parts) worst = std::max(worst, std::abs(p.weight - 1.0 / 3.0));
        if (!(worst <= 1e-3)) out.passed = false;
        three += fmt("%s%s path max |w - 1/3| = %.2g", allow_exact ? "; " : "", allow_exact ? "exact" : "Monte Carlo",
                     worst);
    }
    out.detail = fmt("%d pairs with 2-4 active constraints: max |sum w - 1| = %.2g, max raw-sum gap %.2f SE; ",
                     pairs, worst_w, worst_raw) +
                 three + out.detail;
    return out;
}

// 7. Half-normal moments from the constrained marginals.
Outcome half_normal() {
    const auto td = single_pair_density({0, 0}, iid_sequence({0, 0}));
    const ConstraintSet cs({{0, StateRegion(lower1(0.0))}}, ConstraintMode::conjunct);
    const auto cd = constrain_density(td, cs, {100000, 707, true});
    const auto cm = constrained_marginals(cd.density, {100000, 708, true});
    const auto& s = cm.steps.at(0);
    const double mean = std::sqrt(2.0 / std::numbers::pi);
    const double var = 1.0 - 2.0 / std::numbers::pi;
    const double zm = (s.mean[0] - mean) / s.mean_std_error[0];
    const double zv = (s.covariance(0, 0) - var) / s.variance_std_error[0];
    return {std::abs(zm) <= 4.0 && std::abs(zv) <= 4.0,
            fmt("%zu accepted of 100000; mean %.5f (z %.2f), variance %.5f (z %.2f)", cm.diagnostics.accepted,
                s.mean[0], zm, s.covariance(0, 0), zv)};
}

// 8. Simulate, fit and constrain the position+velocity scenario.
Outcome end_to_end() {
#ifdef TRAJCON_HAVE_CLI
    namespace fs = std::filesystem;
    const auto start = std::chrono::steady_clock::now();
    const fs::path dir = fs::temp_directory_path() / "trajcon_acceptance_e2e";
    fs::remove_all(dir);
    const fs::path cfg_path = fs::path(TRAJCON_CONFIG_DIR) / "constrain_track.json";
    const auto doc = cli::load_json_file(cfg_path);
    auto config = cli::parse_constrain(doc, cfg_path.parent_path());

    cli::SimulateConfig sim{config.common, *config.window, *config.motion, *config.sensor};
    std::ostringstream log;
    cli::cmd_simulate(sim, dir, log);
    config.track->source = cli::TrackSpec::Source::scenario_file;
    config.track->scenario_path = dir / "scenario.json";
    const auto summary = cli::cmd_constrain(config, dir, log);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    Outcome out;
    out.passed = seconds < 60.0;
    int inside = 0;
    int applicable = 0;
    std::string sets;
    for (const auto& set : summary.at("sets")) {
        const double r = set.at("r").get<double>();
        const double rc = set.at("r_constrained").get<double>();
        bool any_below_one = false;
        for (const auto& p : set.at("pairs")) {
            if (p.at("active").get<bool>() && p.at("acceptance").get<double>() < 1.0) any_below_one = true;
        }
        if (any_below_one && !(rc < r)) out.passed = false;
        for (const auto& c : set.at("region_checks")) {
            if (!c.at("applicable").get<bool>()) continue;
            ++applicable;
            if (c.at("inside").get<bool>()) {
                ++inside;
            } else {
                out.passed = false;
            }
        }
        sets += fmt("; %s r %.3f -> r^C %.3f", set.at("name").get<std::string>().c_str(), r, rc);
    }
    fs::remove_all(dir);
    out.detail = fmt("%.1f s (limit 60 s), %d of %d conjunct single-box means inside", seconds, inside, applicable) +
                 sets;
    return out;
#else
    return {false, "built without the command line tool"};
#endif
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"normalization", normalization},
        {"oracle equivalence", oracle_equivalence},
        {"mode identities", mode_identities},
        {"time-window equivalence", time_window_equivalence},
        {"PMBM closure", pmbm_closure},
        {"disjunct partitions", disjunct_partitions},
        {"half-normal truncation", half_normal},
        {"end-to-end constrain run", end_to_end},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::cout << (o.passed ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << criteria[i].first << ", "
                  << fmt("%.1f s", seconds) << "): " << o.detail << std::endl;
        failed += o.passed ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
