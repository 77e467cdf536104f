#include "trajcon/oracle.hpp"

#include "trajcon/constrain.hpp"
#include "trajcon/errors.hpp"
#include "trajcon/gaussian_sequence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace trajcon {
namespace {

void require_runs(const OracleOptions& o) {
    if (o.n < 1000) throw std::invalid_argument("oracle needs at least 1000 draws");
    if (!(o.z_threshold > 0.0)) throw std::invalid_argument("oracle z threshold must be positive");
}

std::string lifetime_name(const Lifetime& lt) {
    return "(" + std::to_string(lt.birth) + "," + std::to_string(lt.death) + ")";
}

OracleEntry make_entry(std::string name, std::string kind, double analytic, double empirical, double se,
                       double threshold) {
    OracleEntry e{std::move(name), std::move(kind), analytic, empirical, se, 0.0, true, true};
    const double diff = empirical - analytic;
    if (se > 0.0) {
        e.z = diff / se;
    } else {
        e.z = diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
    }
    e.passed = std::abs(e.z) <= threshold;
    return e;
}

OracleEntry untested(std::string name, std::string kind, double analytic, double empirical) {
    return {std::move(name), std::move(kind), analytic, empirical, 0.0, 0.0, false, true};
}

/// Proportion check with the binomial error of the empirical side plus the
/// engine's own Monte Carlo error. An analytic value below 1/n with no
/// observed events counts as consistent with zero.
OracleEntry proportion_entry(std::string name, std::string kind, double analytic, double analytic_se,
                             std::size_t hits, std::size_t trials, double threshold) {
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(hits) / n;
    const double a = std::clamp(analytic, 0.0, 1.0);
    const double se = std::sqrt(a * (1.0 - a) / n + analytic_se * analytic_se);
    if (hits == 0 && analytic < 1.0 / n) {
        OracleEntry e{std::move(name), std::move(kind), analytic, p, se, 0.0, true, true};
        return e;
    }
    return make_entry(std::move(name), std::move(kind), analytic, p, se, threshold);
}

/// Conditional lifetime frequencies among the survivors against the
/// constrained pmf.
void pair_entries(const TrajectoryDensity& constrained, const std::map<Lifetime, std::size_t>& counts,
                  std::size_t survivors, const OracleOptions& o, const std::string& prefix,
                  std::vector<OracleEntry>& out) {
    if (!constrained.truncation || constrained.truncation->degenerate) return;
    const auto& tr = *constrained.truncation;
    double spatial_mass = 0.0;
    for (std::size_t j = 0; j < tr.pairs.size(); ++j) {
        if (!tr.pairs[j].active.empty()) spatial_mass += tr.temporal_pmf[j] * tr.pairs[j].acceptance.value;
    }
    const double k = static_cast<double>(survivors);
    for (std::size_t j = 0; j < constrained.pmf.size(); ++j) {
        const auto& e = constrained.pmf.entries[j];
        const auto it = counts.find(e.lifetime);
        const std::size_t c = it == counts.end() ? 0 : it->second;
        const std::string name = prefix + "pmf" + lifetime_name(e.lifetime);
        const double freq = survivors > 0 ? static_cast<double>(c) / k : 0.0;
        if (k * e.probability < o.min_expected_count) {
            out.push_back(untested(name, "pair", e.probability, freq));
            continue;
        }
        double engine_se = 0.0;
        if (spatial_mass > 0.0) engine_se = tr.temporal_pmf[j] * tr.pairs[j].acceptance.std_error / spatial_mass;
        out.push_back(proportion_entry(name, "pair", e.probability, engine_se, c, survivors, o.z_threshold));
    }
    // Survivors on lifetimes the constrained pmf gives no mass are failures.
    for (const auto& [lt, c] : counts) {
        if (constrained.pmf.probability(lt) > 0.0) continue;
        out.push_back(make_entry(prefix + "pmf" + lifetime_name(lt), "pair", 0.0, static_cast<double>(c) / k, 0.0,
                                 o.z_threshold));
    }
}

/// Per-step means and variances of the survivors against the engine's
/// rejection-sampled constrained marginals.
void moment_entries(const TrajectoryDensity& constrained, const SampleCloud& survivors, const OracleOptions& o,
                    const std::string& prefix, std::vector<OracleEntry>& out) {
    if (!o.check_moments || survivors.size() == 0) return;
    if (!constrained.truncation || constrained.truncation->degenerate) return;
    ConstrainedMarginals engine;
    try {
        engine = constrained_marginals(constrained, o.engine);
    } catch (const AcceptanceRateError&) {
        return;
    }
    const auto empirical = step_moments(survivors);
    std::map<Time, const StepMoments*> by_time;
    for (const auto& s : engine.steps) by_time[s.time] = &s;
    for (const auto& s : empirical) {
        const auto it = by_time.find(s.time);
        if (it == by_time.end()) continue;
        const StepMoments& a = *it->second;
        if (s.samples < o.min_moment_samples || a.samples < o.min_moment_samples) continue;
        for (Eigen::Index i = 0; i < s.mean.size(); ++i) {
            const std::string tag = prefix + "t" + std::to_string(s.time) + ".x" + std::to_string(i);
            const double se_m = std::hypot(s.mean_std_error[i], a.mean_std_error[i]);
            out.push_back(make_entry(tag + ".mean", "mean", a.mean[i], s.mean[i], se_m, o.z_threshold));
            const double se_v = std::hypot(s.variance_std_error[i], a.variance_std_error[i]);
            out.push_back(
                make_entry(tag + ".var", "variance", a.covariance(i, i), s.covariance(i, i), se_v, o.z_threshold));
        }
    }
}

void add_to_cloud(SampleCloud& cloud, const Trajectory& t) {
    auto& s = cloud.strata[t.lifetime()];
    s.samples.push_back(t.stacked());
    s.weights.push_back(1.0);
}

void append(OracleReport& into, const OracleReport& part) {
    into.entries.insert(into.entries.end(), part.entries.begin(), part.entries.end());
}

}  // namespace

bool OracleReport::passed() const { return failures() == 0; }

std::size_t OracleReport::failures() const {
    return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(),
                                                   [](const OracleEntry& e) { return !e.passed; }));
}

std::size_t OracleReport::failures(const std::string& kind) const {
    return static_cast<std::size_t>(std::count_if(
        entries.begin(), entries.end(), [&](const OracleEntry& e) { return !e.passed && e.kind == kind; }));
}

OracleReport oracle_bernoulli(const BernoulliTrajectory& b, const ConstraintSet& cs, const OracleOptions& options) {
    return oracle_bernoulli(b, constrain_bernoulli(b, cs, options.engine), cs, options);
}

OracleReport oracle_bernoulli(const BernoulliTrajectory& b, const BernoulliTrajectory& constrained,
                              const ConstraintSet& cs, const OracleOptions& options) {
    require_runs(options);
    OracleReport rep;
    rep.subject = "bernoulli";
    rep.n = options.n;
    rep.seed = options.seed;
    rep.z_threshold = options.z_threshold;

    const BernoulliSampler sampler(b);
    Rng rng(options.seed);
    std::size_t survivors = 0;
    std::map<Lifetime, std::size_t> counts;
    SampleCloud cloud;
    cloud.state_dim = b.density.state_dim();
    for (std::size_t i = 0; i < options.n; ++i) {
        for (const auto& t : sampler.draw(rng)) {
            if (!satisfies(t, cs)) continue;
            ++survivors;
            ++counts[t.lifetime()];
            if (options.check_moments) add_to_cloud(cloud, t);
        }
    }
    cloud.proposals = options.n;

    double engine_se = 0.0;
    if (constrained.density.truncation) engine_se = b.r * constrained.density.truncation->report.joint.std_error;
    rep.entries.push_back(
        proportion_entry("r", "existence", constrained.r, engine_se, survivors, options.n, options.z_threshold));
    pair_entries(constrained.density, counts, survivors, options, "", rep.entries);
    moment_entries(constrained.density, cloud, options, "", rep.entries);
    return rep;
}

OracleReport oracle_ppp(const PppTrajectory& p, const ConstraintSet& cs, const OracleOptions& options) {
    return oracle_ppp(p, constrain_ppp(p, cs, options.engine), cs, options);
}

OracleReport oracle_ppp(const PppTrajectory& p, const PppTrajectory& constrained, const ConstraintSet& cs,
                        const OracleOptions& options) {
    require_runs(options);
    OracleReport rep;
    rep.subject = "ppp";
    rep.n = options.n;
    rep.seed = options.seed;
    rep.z_threshold = options.z_threshold;

    const PppSampler sampler(p);
    Rng rng(options.seed);
    std::size_t survivors = 0;
    double sum_s = 0.0, sum_ss = 0.0, sum_r = 0.0, sum_rr = 0.0, sum_sr = 0.0;
    std::map<Lifetime, std::size_t> counts;
    SampleCloud cloud;
    cloud.state_dim = p.density.state_dim();
    for (std::size_t i = 0; i < options.n; ++i) {
        const auto draw = sampler.draw(rng);
        std::size_t kept = 0;
        for (const auto& t : draw) {
            if (!satisfies(t, cs)) continue;
            ++kept;
            ++counts[t.lifetime()];
            if (options.check_moments) add_to_cloud(cloud, t);
        }
        survivors += kept;
        const auto s = static_cast<double>(kept);
        const auto r = static_cast<double>(draw.size() - kept);
        sum_s += s;
        sum_ss += s * s;
        sum_r += r;
        sum_rr += r * r;
        sum_sr += s * r;
    }
    cloud.proposals = options.n;

    const double n = static_cast<double>(options.n);
    const double mean_s = sum_s / n;
    const double mean_r = sum_r / n;
    const double var_s = (sum_ss - n * mean_s * mean_s) / (n - 1.0);
    const double var_r = (sum_rr - n * mean_r * mean_r) / (n - 1.0);
    const double cov_sr = (sum_sr - n * mean_s * mean_r) / (n - 1.0);

    const double mu_c = constrained.mu;
    double engine_se = 0.0;
    if (constrained.density.truncation) engine_se = p.mu * constrained.density.truncation->report.joint.std_error;

    // Surviving count is Poisson(mu_c): mean and variance both mu_c, and the
    // sample variance has variance (mu + 2 mu^2) / n.
    rep.entries.push_back(make_entry("mu", "intensity", mu_c, mean_s, std::sqrt(mu_c / n + engine_se * engine_se),
                                     options.z_threshold));
    rep.entries.push_back(make_entry("variance", "dispersion", mu_c, var_s,
                                     std::sqrt((mu_c + 2.0 * mu_c * mu_c) / n + engine_se * engine_se),
                                     options.z_threshold));
    if (var_s > 0.0 && var_r > 0.0) {
        rep.entries.push_back(make_entry("corr(survived,removed)", "correlation", 0.0,
                                         cov_sr / std::sqrt(var_s * var_r), 1.0 / std::sqrt(n), options.z_threshold));
    } else {
        rep.entries.push_back(untested("corr(survived,removed)", "correlation", 0.0, 0.0));
    }
    pair_entries(constrained.density, counts, survivors, options, "", rep.entries);
    moment_entries(constrained.density, cloud, options, "", rep.entries);
    return rep;
}

OracleReport oracle_pmbm(const PmbmDensity& m, const ConstraintSet& cs, const OracleOptions& options) {
    return oracle_pmbm(m, constrain_pmbm(m, cs, options.engine), cs, options);
}

OracleReport oracle_pmbm(const PmbmDensity& m, const PmbmDensity& constrained, const ConstraintSet& cs,
                         const OracleOptions& options) {
    require_runs(options);
    require_valid(m);
    if (constrained.hypotheses.size() != m.hypotheses.size()) {
        throw std::invalid_argument("constrained PMBM has a different number of hypotheses");
    }
    OracleReport rep;
    rep.subject = "pmbm";
    rep.n = options.n;
    rep.seed = options.seed;
    rep.z_threshold = options.z_threshold;

    const auto prefixed = [](OracleReport part, const std::string& prefix) {
        for (auto& e : part.entries) e.name = prefix + e.name;
        return part;
    };

    OracleOptions sub = options;
    if (m.ppp.mu > 0.0) {
        sub.seed = derive_seed(options.seed, 0);
        append(rep, prefixed(oracle_ppp(m.ppp, constrained.ppp, cs, sub), "ppp."));
    }
    for (std::size_t a = 0; a < m.hypotheses.size(); ++a) {
        const auto& h = m.hypotheses[a];
        const auto& hc = constrained.hypotheses[a];
        if (hc.tracks.size() != h.tracks.size()) {
            throw std::invalid_argument("constrained PMBM hypothesis has a different number of tracks");
        }
        rep.entries.push_back(make_entry("h" + std::to_string(a) + ".weight", "weight", h.weight, hc.weight, 0.0,
                                         options.z_threshold));
        for (std::size_t i = 0; i < h.tracks.size(); ++i) {
            sub.seed = derive_seed(options.seed, a + 1, i);
            const std::string prefix = "h" + std::to_string(a) + ".t" + std::to_string(i) + ".";
            append(rep, prefixed(oracle_bernoulli(h.tracks[i], hc.tracks[i], cs, sub), prefix));
        }
    }

    // Whole-set cardinality after filtering.
    const PmbmSampler sampler(m);
    Rng rng(derive_seed(options.seed, 0, 1));
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t i = 0; i < options.n; ++i) {
        const auto kept = static_cast<double>(tau_set(sampler.draw(rng), cs).size());
        sum += kept;
        sum_sq += kept * kept;
    }
    const double n = static_cast<double>(options.n);
    const double mean = sum / n;
    const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
    double engine_var = 0.0;
    if (constrained.ppp.density.truncation) {
        engine_var += std::pow(m.ppp.mu * constrained.ppp.density.truncation->report.joint.std_error, 2);
    }
    for (std::size_t a = 0; a < m.hypotheses.size(); ++a) {
        for (std::size_t i = 0; i < m.hypotheses[a].tracks.size(); ++i) {
            const auto& c = constrained.hypotheses[a].tracks[i];
            if (!c.density.truncation) continue;
            engine_var += std::pow(
                m.hypotheses[a].weight * m.hypotheses[a].tracks[i].r * c.density.truncation->report.joint.std_error, 2);
        }
    }
    rep.entries.push_back(make_entry("cardinality", "cardinality", constrained.expected_cardinality(), mean,
                                     std::sqrt(var / n + engine_var), options.z_threshold));
    return rep;
}

std::string format_table(const OracleReport& report) {
    std::ostringstream os;
    os << "oracle " << report.subject << "  n=" << report.n << "  seed=" << report.seed
       << "  z_threshold=" << report.z_threshold << "\n";
    char line[256];
    std::snprintf(line, sizeof line, "%-34s %-12s %14s %14s %12s %9s  %s\n", "quantity", "kind", "analytic",
                  "empirical", "std_error", "z", "result");
    os << line;
    for (const auto& e : report.entries) {
        const char* result = !e.tested ? "skip" : (e.passed ? "pass" : "FAIL");
        std::snprintf(line, sizeof line, "%-34s %-12s %14.8g %14.8g %12.4g %9.3f  %s\n", e.name.c_str(),
                      e.kind.c_str(), e.analytic, e.empirical, e.std_error, e.z, result);
        os << line;
    }
    os << (report.passed() ? "PASS" : "FAIL") << " (" << report.failures() << " of " << report.entries.size()
       << " checks failed)\n";
    return os.str();
}

}  // namespace trajcon
