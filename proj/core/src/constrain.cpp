#include "trajcon/constrain.hpp"

#include "indicator.hpp"
#include "trajcon/errors.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace trajcon {
namespace {

PairTruncation truncate_pair(const GaussianSequence& gs, const Lifetime& lt, const ConstraintSet& cs,
                             ActiveConstraints active, const McOptions& pair_mc) {
    PairTruncation pt;
    pt.active = std::move(active);
    if (pt.active.empty()) return pt;

    if (cs.mode() == ConstraintMode::conjunct) {
        std::vector<RegionQuery> queries;
        queries.reserve(pt.active.size());
        for (auto i : pt.active.indices) queries.push_back({cs[i].time, cs[i].region, Side::inside});
        pt.acceptance = region_probability(gs, lt, queries, pair_mc);
        return pt;
    }

    std::vector<Constraint> active_cs;
    active_cs.reserve(pt.active.size());
    for (auto i : pt.active.indices) active_cs.push_back(cs[i]);
    const auto patterns = inside_pattern_probabilities(gs, lt, active_cs, pair_mc);

    // Pattern 0 is "every active constraint violated".
    pt.acceptance = {1.0 - patterns[0].value, patterns[0].std_error};
    double raw_total = 0.0;
    for (std::size_t m = 1; m < patterns.size(); ++m) {
        if (patterns[m].value <= 0.0) continue;
        PartitionTerm term;
        term.inside_mask = static_cast<std::uint32_t>(m);
        term.raw_weight = patterns[m].value;
        term.raw_std_error = patterns[m].std_error;
        raw_total += term.raw_weight;
        pt.partitions.push_back(term);
    }
    for (auto& term : pt.partitions) term.weight = term.raw_weight / raw_total;
    return pt;
}

}  // namespace

ConstrainedDensity constrain_density(const TrajectoryDensity& td, const ConstraintSet& cs, const McOptions& mc) {
    require_valid(td);
    if (td.truncation) throw std::invalid_argument("density is already constrained");
    if (cs.state_dim() != td.state_dim()) {
        throw std::invalid_argument("constraint dimension " + std::to_string(cs.state_dim()) +
                                    " does not match state dimension " + std::to_string(td.state_dim()));
    }

    const std::size_t n = td.pmf.size();
    std::vector<ActiveConstraints> active(n);
    double prob_alive = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const auto& e = td.pmf.entries[j];
        active[j] = active_constraints(e.lifetime, cs);
        if (!active[j].empty()) prob_alive += e.probability;
        if (cs.mode() == ConstraintMode::disjunct && active[j].size() > kMaxDisjunctActive) {
            throw PartitionBudgetError(
                "lifetime (" + std::to_string(e.lifetime.birth) + "," + std::to_string(e.lifetime.death) +
                ") has " + std::to_string(active[j].size()) + " active disjunct constraints; at most " +
                std::to_string(kMaxDisjunctActive) +
                " are supported (2^20 partitions). Use conjunct mode or coarser constraints.");
        }
    }
    if (!(prob_alive > 0.0)) {
        throw ZeroSupportError("no lifetime with positive probability overlaps any constraint time");
    }

    Truncation tr{cs, {}, std::vector<double>(n, 0.0), {}, false};
    tr.pairs.reserve(n);
    double spatial_mass = 0.0;  // sum over qualifying pairs of P * s
    double spatial_var = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const auto& e = td.pmf.entries[j];
        McOptions pair_mc = mc;
        pair_mc.seed = derive_seed(mc.seed, j);
        tr.pairs.push_back(truncate_pair(td.conditionals[j], e.lifetime, cs, std::move(active[j]), pair_mc));
        const auto& pt = tr.pairs.back();
        if (pt.active.empty()) continue;
        tr.temporal_pmf[j] = e.probability / prob_alive;
        spatial_mass += e.probability * pt.acceptance.value;
        spatial_var += std::pow(e.probability * pt.acceptance.std_error, 2);
    }

    ConstraintReport& rep = tr.report;
    rep.prob_alive = {prob_alive, 0.0};
    rep.prob_spatial = {spatial_mass / prob_alive, std::sqrt(spatial_var) / prob_alive};
    rep.joint = {spatial_mass, std::sqrt(spatial_var)};

    ConstrainedDensity out;
    out.density.conditionals = td.conditionals;
    out.density.pmf = td.pmf;
    if (spatial_mass > 0.0) {
        for (std::size_t j = 0; j < n; ++j) {
            const auto& pt = tr.pairs[j];
            out.density.pmf.entries[j].probability =
                pt.active.empty() ? 0.0 : td.pmf.entries[j].probability * pt.acceptance.value / spatial_mass;
        }
    } else {
        tr.degenerate = true;
        for (std::size_t j = 0; j < n; ++j) out.density.pmf.entries[j].probability = tr.temporal_pmf[j];
    }
    out.report = rep;
    out.density.truncation = std::move(tr);
    return out;
}

const ConstraintReport& report_of(const TrajectoryDensity& constrained) {
    if (!constrained.truncation) throw std::invalid_argument("density is not constrained");
    return constrained.truncation->report;
}

BernoulliTrajectory constrain_bernoulli(const BernoulliTrajectory& b, const ConstraintSet& cs, const McOptions& mc) {
    BernoulliTrajectory out;
    try {
        auto cd = constrain_density(b.density, cs, mc);
        out.r = b.r * cd.report.joint.value;
        out.density = std::move(cd.density);
        out.degenerate = out.density.truncation->degenerate;
        if (out.degenerate) out.r = 0.0;
    } catch (const ZeroSupportError&) {
        out.r = 0.0;
        out.density = b.density;
        out.degenerate = true;
    }
    return out;
}

PppTrajectory constrain_ppp(const PppTrajectory& p, const ConstraintSet& cs, const McOptions& mc) {
    PppTrajectory out;
    try {
        auto cd = constrain_density(p.density, cs, mc);
        out.mu = p.mu * cd.report.joint.value;
        out.density = std::move(cd.density);
        out.degenerate = out.density.truncation->degenerate || out.mu == 0.0;
        if (out.degenerate) out.mu = 0.0;
    } catch (const ZeroSupportError&) {
        out.mu = 0.0;
        out.density = p.density;
        out.degenerate = true;
    }
    return out;
}

PmbmDensity constrain_pmbm(const PmbmDensity& m, const ConstraintSet& cs, const McOptions& mc) {
    require_valid(m);
    PmbmDensity out;
    out.ppp = constrain_ppp(m.ppp, cs, mc);
    out.hypotheses.reserve(m.hypotheses.size());
    for (const auto& h : m.hypotheses) {
        GlobalHypothesis gh;
        gh.weight = h.weight;
        gh.tracks.reserve(h.tracks.size());
        for (const auto& b : h.tracks) gh.tracks.push_back(constrain_bernoulli(b, cs, mc));
        out.hypotheses.push_back(std::move(gh));
    }
    return out;
}

ConstrainedMarginals constrained_marginals(const TrajectoryDensity& constrained, const McOptions& mc) {
    if (!constrained.truncation) throw std::invalid_argument("constrained_marginals needs a constrained density");
    if (mc.budget == 0) throw std::invalid_argument("Monte Carlo budget must be positive");
    const auto& tr = *constrained.truncation;
    const auto d = constrained.state_dim();

    std::discrete_distribution<std::size_t> pick(tr.temporal_pmf.begin(), tr.temporal_pmf.end());
    std::vector<std::optional<GaussianSampler>> samplers(constrained.conditionals.size());

    ConstrainedMarginals out;
    out.cloud.state_dim = d;
    Rng rng(mc.seed);
    Eigen::VectorXd x;
    for (std::size_t s = 0; s < mc.budget; ++s) {
        const std::size_t j = pick(rng);
        if (!samplers[j]) samplers[j].emplace(constrained.conditionals[j]);
        const auto& lt = constrained.pmf.entries[j].lifetime;
        x.resize(static_cast<Eigen::Index>(lt.length() * d));
        samplers[j]->draw(rng, x);
        if (!detail::stacked_satisfies(tr.constraints, tr.pairs[j].active, lt, x, d)) continue;
        auto& stratum = out.cloud.strata[lt];
        stratum.samples.push_back(x);
        stratum.weights.push_back(1.0);
        ++out.diagnostics.accepted;
    }
    out.cloud.proposals = mc.budget;
    out.diagnostics.proposals = mc.budget;
    out.diagnostics.acceptance_rate =
        static_cast<double>(out.diagnostics.accepted) / static_cast<double>(mc.budget);
    if (out.diagnostics.acceptance_rate < 1e-6) {
        throw AcceptanceRateError("rejection sampling accepted " + std::to_string(out.diagnostics.accepted) +
                                  " of " + std::to_string(mc.budget) +
                                  " proposals (rate below 1e-6); increase the Monte Carlo budget");
    }
    out.steps = step_moments(out.cloud);
    return out;
}

TrajectoryDensity gaussian_view(const TrajectoryDensity& constrained, const McOptions& mc) {
    auto cm = constrained_marginals(constrained, mc);
    for (auto it = cm.cloud.strata.begin(); it != cm.cloud.strata.end();) {
        if (it->second.effective_size() < 2.0) {
            it = cm.cloud.strata.erase(it);
        } else {
            ++it;
        }
    }
    return moment_match(cm.cloud);
}

}  // namespace trajcon
