#include "trajcon/gaussian_sequence.hpp"

#include "indicator.hpp"
#include "trajcon/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace trajcon {
namespace {

constexpr double kPmfTolerance = 1e-12;
constexpr double kCovTolerance = 1e-10;

double matrix_scale(const Eigen::MatrixXd& m) {
    return std::max(1.0, m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff());
}

std::string describe(const Lifetime& lt) {
    std::ostringstream os;
    os << "(" << lt.birth << "," << lt.death << ")";
    return os.str();
}

double upper_tail(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

// Pr(lower <= X <= upper) for X ~ N(mean, var), accurate in both tails.
double interval_probability(const Interval& iv, double mean, double var) {
    if (!iv.bounded()) return 1.0;
    if (var <= 0.0) return iv.contains(mean) ? 1.0 : 0.0;
    const double sd = std::sqrt(var);
    const double lo = iv.lower ? (*iv.lower - mean) / sd : -std::numeric_limits<double>::infinity();
    const double hi = iv.upper ? (*iv.upper - mean) / sd : std::numeric_limits<double>::infinity();
    double p = 0.0;
    if (lo > 0.0) {
        p = upper_tail(lo) - upper_tail(hi);
    } else if (hi < 0.0) {
        p = normal_cdf(hi) - normal_cdf(lo);
    } else {
        p = 1.0 - upper_tail(hi) - normal_cdf(lo);
    }
    return std::clamp(p, 0.0, 1.0);
}

Eigen::Index block_offset(const Lifetime& lt, Time t, std::size_t state_dim) {
    return static_cast<Eigen::Index>((t - lt.birth) * static_cast<Time>(state_dim));
}

void check_times(const GaussianSequence& gs, const Lifetime& lt, std::span<const Time> times) {
    if (gs.blocks() != lt.length()) {
        throw std::invalid_argument("gaussian sequence has " + std::to_string(gs.blocks()) +
                                    " blocks for lifetime " + describe(lt));
    }
    for (Time t : times) {
        if (!lt.contains(t)) {
            throw std::out_of_range("time " + std::to_string(t) + " outside lifetime " + describe(lt));
        }
    }
}

// Per-entry inside probabilities when every bounded coordinate is
// uncorrelated with every other and each region is a single box.
std::optional<std::vector<double>> exact_inside(const GaussianSequence& gs, const Lifetime& lt,
                                                std::span<const Time> times,
                                                std::span<const StateRegion* const> regions) {
    std::vector<Eigen::Index> rows;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const auto& region = *regions[i];
        if (region.is_full_space()) continue;
        if (region.boxes().size() != 1) return std::nullopt;
        const auto& box = region.boxes().front();
        for (std::size_t k = 0; k < box.dim(); ++k) {
            if (box[k].bounded()) {
                rows.push_back(block_offset(lt, times[i], gs.state_dim) + static_cast<Eigen::Index>(k));
            }
        }
    }
    for (std::size_t a = 0; a < rows.size(); ++a) {
        for (std::size_t b = a + 1; b < rows.size(); ++b) {
            if (gs.covariance(rows[a], rows[b]) != 0.0 || gs.covariance(rows[b], rows[a]) != 0.0) {
                return std::nullopt;
            }
        }
    }
    std::vector<double> probs(times.size(), 1.0);
    for (std::size_t i = 0; i < times.size(); ++i) {
        const auto& region = *regions[i];
        if (region.is_full_space()) continue;
        const auto& box = region.boxes().front();
        const auto base = block_offset(lt, times[i], gs.state_dim);
        for (std::size_t k = 0; k < box.dim(); ++k) {
            const auto r = base + static_cast<Eigen::Index>(k);
            probs[i] *= interval_probability(box[k], gs.mean[r], gs.covariance(r, r));
        }
    }
    return probs;
}

// Draws `mc.budget` samples of the marginal over `times` and reports, for each
// sample, which regions contain the state at their time.
template <class Fn>
void for_each_indicator_sample(const GaussianSequence& gs, const Lifetime& lt, std::span<const Time> times,
                               std::span<const StateRegion* const> regions, const McOptions& mc, Fn&& fn) {
    if (mc.budget == 0) throw std::invalid_argument("Monte Carlo budget must be positive");
    std::vector<Time> sorted(times.begin(), times.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    const GaussianSequence sub = marginal(gs, lt, sorted);
    const GaussianSampler sampler(sub);

    std::vector<Eigen::Index> offsets(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        const auto pos = std::lower_bound(sorted.begin(), sorted.end(), times[i]) - sorted.begin();
        offsets[i] = static_cast<Eigen::Index>(pos) * static_cast<Eigen::Index>(gs.state_dim);
    }

    Rng rng(mc.seed);
    Eigen::VectorXd x(static_cast<Eigen::Index>(sampler.dim()));
    std::vector<char> inside(times.size());
    for (std::size_t s = 0; s < mc.budget; ++s) {
        sampler.draw(rng, x);
        for (std::size_t i = 0; i < times.size(); ++i) {
            inside[i] = detail::block_inside(*regions[i], x, offsets[i], gs.state_dim) ? 1 : 0;
        }
        fn(inside);
    }
}

Estimate binomial_estimate(std::size_t hits, std::size_t n) {
    const double p = static_cast<double>(hits) / static_cast<double>(n);
    return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(n))};
}

void weighted_moments(const std::vector<const Eigen::VectorXd*>& xs, const std::vector<double>& ws,
                      Eigen::Index offset, Eigen::Index dim, StepMoments& out) {
    double W = 0.0, W2 = 0.0;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        W += ws[i];
        W2 += ws[i] * ws[i];
        mean += ws[i] * xs[i]->segment(offset, dim);
    }
    out.samples = xs.size();
    out.mean = Eigen::VectorXd::Zero(dim);
    out.covariance = Eigen::MatrixXd::Zero(dim, dim);
    out.mean_std_error = Eigen::VectorXd::Zero(dim);
    out.variance_std_error = Eigen::VectorXd::Zero(dim);
    if (W <= 0.0) return;
    mean /= W;
    out.mean = mean;

    Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd m4 = Eigen::VectorXd::Zero(dim);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const Eigen::VectorXd d = xs[i]->segment(offset, dim) - mean;
        scatter.noalias() += ws[i] * d * d.transpose();
        m4 += ws[i] * d.array().pow(4).matrix();
    }
    const double n_eff = W * W / W2;
    const double denom = W - W2 / W;
    if (denom > 0.0) out.covariance = scatter / denom;
    out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
    m4 /= W;
    const Eigen::VectorXd var_biased = scatter.diagonal() / W;
    for (Eigen::Index k = 0; k < dim; ++k) {
        out.mean_std_error[k] = std::sqrt(std::max(0.0, out.covariance(k, k)) / n_eff);
        out.variance_std_error[k] =
            std::sqrt(std::max(0.0, m4[k] - var_biased[k] * var_biased[k]) / n_eff);
    }
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

std::optional<std::size_t> BirthDeathPmf::index_of(const Lifetime& lt) const {
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (entries[i].lifetime == lt) return i;
    }
    return std::nullopt;
}

double BirthDeathPmf::probability(const Lifetime& lt) const {
    const auto i = index_of(lt);
    return i ? entries[*i].probability : 0.0;
}

BirthDeathPmf BirthDeathPmf::uniform(std::span<const Lifetime> support) {
    if (support.empty()) throw std::invalid_argument("uniform pmf needs a nonempty support");
    BirthDeathPmf pmf;
    const double p = 1.0 / static_cast<double>(support.size());
    for (const auto& lt : support) pmf.entries.push_back({lt, p});
    return pmf;
}

std::vector<std::string> check_pmf(const BirthDeathPmf& pmf) {
    std::vector<std::string> issues;
    if (pmf.entries.empty()) issues.emplace_back("pmf has empty support");
    double sum = 0.0;
    for (std::size_t i = 0; i < pmf.entries.size(); ++i) {
        const auto& e = pmf.entries[i];
        if (e.lifetime.birth > e.lifetime.death) {
            issues.push_back("pmf entry " + describe(e.lifetime) + " has birth after death");
        }
        if (!(e.probability >= 0.0)) {
            issues.push_back("pmf entry " + describe(e.lifetime) + " has negative probability");
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (pmf.entries[j].lifetime == e.lifetime) {
                issues.push_back("pmf lifetime " + describe(e.lifetime) + " listed twice");
            }
        }
        sum += e.probability;
    }
    if (!pmf.entries.empty() && !(std::abs(sum - 1.0) <= kPmfTolerance)) {
        std::ostringstream os;
        os.precision(17);
        os << "pmf sums to " << sum << ", expected 1";
        issues.push_back(os.str());
    }
    return issues;
}

std::vector<std::string> check_gaussian(const GaussianSequence& gs) {
    std::vector<std::string> issues;
    const auto n = gs.mean.size();
    if (gs.state_dim == 0) {
        issues.emplace_back("state dimension must be >= 1");
        return issues;
    }
    if (n == 0 || n % static_cast<Eigen::Index>(gs.state_dim) != 0) {
        issues.emplace_back("mean length is not a positive multiple of the state dimension");
    }
    if (gs.covariance.rows() != n || gs.covariance.cols() != n) {
        issues.emplace_back("covariance shape does not match mean length");
        return issues;
    }
    if (!gs.mean.allFinite() || !gs.covariance.allFinite()) {
        issues.emplace_back("non-finite mean or covariance entry");
        return issues;
    }
    const double scale = matrix_scale(gs.covariance);
    if ((gs.covariance - gs.covariance.transpose()).cwiseAbs().maxCoeff() > kCovTolerance * scale) {
        issues.emplace_back("covariance is not symmetric");
    }
    const Eigen::MatrixXd sym = 0.5 * (gs.covariance + gs.covariance.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -kCovTolerance * scale) {
        issues.emplace_back("covariance is not positive semidefinite");
    }
    return issues;
}

std::vector<std::string> check_density(const TrajectoryDensity& td) {
    auto issues = check_pmf(td.pmf);
    if (td.conditionals.size() != td.pmf.size()) {
        issues.push_back("density has " + std::to_string(td.conditionals.size()) + " conditionals for " +
                         std::to_string(td.pmf.size()) + " pmf entries");
        return issues;
    }
    for (std::size_t i = 0; i < td.conditionals.size(); ++i) {
        const auto& gs = td.conditionals[i];
        const auto& lt = td.pmf.entries[i].lifetime;
        for (const auto& msg : check_gaussian(gs)) {
            issues.push_back("conditional " + describe(lt) + ": " + msg);
        }
        if (gs.state_dim != td.state_dim()) {
            issues.push_back("conditional " + describe(lt) + " has a different state dimension");
        }
        if (gs.state_dim > 0 && gs.blocks() != lt.length()) {
            issues.push_back("conditional " + describe(lt) + " has " + std::to_string(gs.blocks()) +
                             " blocks for a lifetime of length " + std::to_string(lt.length()));
        }
    }
    if (td.truncation) {
        const auto& tr = *td.truncation;
        if (tr.pairs.size() != td.pmf.size() || tr.temporal_pmf.size() != td.pmf.size()) {
            issues.emplace_back("truncation is not aligned with the pmf support");
        }
        if (tr.constraints.state_dim() != td.state_dim()) {
            issues.emplace_back("truncation constraints differ in state dimension");
        }
        for (const auto& p : tr.pairs) {
            if (!(p.acceptance.value >= 0.0 && p.acceptance.value <= 1.0)) {
                issues.emplace_back("truncation acceptance probability outside [0,1]");
            }
            double wsum = 0.0;
            for (const auto& term : p.partitions) {
                if (!(term.raw_weight >= 0.0)) issues.emplace_back("negative partition weight");
                wsum += term.weight;
            }
            if (!p.partitions.empty() && std::abs(wsum - 1.0) > 1e-10) {
                issues.emplace_back("partition weights do not sum to 1");
            }
        }
    }
    return issues;
}

void require_valid(const TrajectoryDensity& td) {
    const auto issues = check_density(td);
    if (issues.empty()) return;
    std::string msg = "invalid trajectory density:";
    for (const auto& s : issues) msg += "\n  " + s;
    throw std::invalid_argument(msg);
}

GaussianSequence marginal(const GaussianSequence& gs, const Lifetime& lifetime, std::span<const Time> times) {
    if (times.empty()) throw std::invalid_argument("marginal needs at least one time");
    check_times(gs, lifetime, times);
    std::vector<Time> sorted(times.begin(), times.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    if (sorted.size() == lifetime.length()) return gs;

    const auto d = static_cast<Eigen::Index>(gs.state_dim);
    const auto n = static_cast<Eigen::Index>(sorted.size()) * d;
    std::vector<Eigen::Index> rows;
    rows.reserve(static_cast<std::size_t>(n));
    for (Time t : sorted) {
        const auto base = block_offset(lifetime, t, gs.state_dim);
        for (Eigen::Index k = 0; k < d; ++k) rows.push_back(base + k);
    }
    GaussianSequence out;
    out.state_dim = gs.state_dim;
    out.mean.resize(n);
    out.covariance.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        out.mean[i] = gs.mean[rows[static_cast<std::size_t>(i)]];
        for (Eigen::Index j = 0; j < n; ++j) {
            out.covariance(i, j) = gs.covariance(rows[static_cast<std::size_t>(i)], rows[static_cast<std::size_t>(j)]);
        }
    }
    return out;
}

Estimate region_probability(const GaussianSequence& gs, const Lifetime& lifetime,
                            std::span<const RegionQuery> queries, const McOptions& mc) {
    if (queries.empty()) throw std::invalid_argument("region probability needs at least one query");
    std::vector<Time> times;
    std::vector<const StateRegion*> regions;
    for (const auto& q : queries) {
        if (q.region.dim() != gs.state_dim) {
            throw std::invalid_argument("region dimension does not match state dimension");
        }
        times.push_back(q.time);
        regions.push_back(&q.region);
    }
    check_times(gs, lifetime, times);
    {
        auto sorted = times;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
            throw std::invalid_argument("region queries must have distinct times");
        }
    }

    if (mc.allow_exact) {
        if (const auto probs = exact_inside(gs, lifetime, times, regions)) {
            double p = 1.0;
            for (std::size_t i = 0; i < queries.size(); ++i) {
                p *= queries[i].side == Side::inside ? (*probs)[i] : 1.0 - (*probs)[i];
            }
            return {p, 0.0};
        }
    }

    std::size_t hits = 0;
    for_each_indicator_sample(gs, lifetime, times, regions, mc, [&](const std::vector<char>& inside) {
        for (std::size_t i = 0; i < queries.size(); ++i) {
            if ((inside[i] != 0) != (queries[i].side == Side::inside)) return;
        }
        ++hits;
    });
    return binomial_estimate(hits, mc.budget);
}

std::vector<Estimate> inside_pattern_probabilities(const GaussianSequence& gs, const Lifetime& lifetime,
                                                   std::span<const Constraint> constraints,
                                                   const McOptions& mc) {
    if (constraints.empty()) throw std::invalid_argument("pattern probabilities need at least one constraint");
    if (constraints.size() > 24) throw std::invalid_argument("too many constraints for pattern enumeration");
    std::vector<Time> times;
    std::vector<const StateRegion*> regions;
    for (const auto& c : constraints) {
        if (c.region.dim() != gs.state_dim) {
            throw std::invalid_argument("region dimension does not match state dimension");
        }
        times.push_back(c.time);
        regions.push_back(&c.region);
    }
    check_times(gs, lifetime, times);
    const std::size_t n = constraints.size();
    const std::size_t patterns = std::size_t{1} << n;
    std::vector<Estimate> out(patterns);

    if (mc.allow_exact) {
        if (const auto probs = exact_inside(gs, lifetime, times, regions)) {
            for (std::size_t m = 0; m < patterns; ++m) {
                double p = 1.0;
                for (std::size_t i = 0; i < n; ++i) p *= (m >> i) & 1U ? (*probs)[i] : 1.0 - (*probs)[i];
                out[m] = {p, 0.0};
            }
            return out;
        }
    }

    std::vector<std::size_t> counts(patterns, 0);
    for_each_indicator_sample(gs, lifetime, times, regions, mc, [&](const std::vector<char>& inside) {
        std::size_t m = 0;
        for (std::size_t i = 0; i < n; ++i) m |= static_cast<std::size_t>(inside[i] != 0) << i;
        ++counts[m];
    });
    for (std::size_t m = 0; m < patterns; ++m) out[m] = binomial_estimate(counts[m], mc.budget);
    return out;
}

GaussianSampler::GaussianSampler(const GaussianSequence& gs) : mean_(gs.mean) {
    const auto n = gs.mean.size();
    if (gs.covariance.rows() != n || gs.covariance.cols() != n) {
        throw std::invalid_argument("covariance shape does not match mean length");
    }
    const Eigen::MatrixXd sym = 0.5 * (gs.covariance + gs.covariance.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
    if (eig.info() != Eigen::Success) throw std::invalid_argument("covariance eigendecomposition failed");
    const double scale = matrix_scale(sym);
    if (n > 0 && eig.eigenvalues().minCoeff() < -kCovTolerance * scale) {
        throw std::invalid_argument("covariance is not positive semidefinite");
    }
    const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    factor_ = eig.eigenvectors() * root.asDiagonal();
    scratch_.resize(n);
}

void GaussianSampler::draw(Rng& rng, Eigen::VectorXd& out) const {
    std::normal_distribution<double> normal;
    for (Eigen::Index i = 0; i < scratch_.size(); ++i) scratch_[i] = normal(rng);
    out.noalias() = factor_ * scratch_;
    out += mean_;
}

Eigen::VectorXd GaussianSampler::draw(Rng& rng) const {
    Eigen::VectorXd out(mean_.size());
    draw(rng, out);
    return out;
}

double Stratum::total_weight() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

double Stratum::effective_size() const {
    double w = 0.0, w2 = 0.0;
    for (double x : weights) {
        w += x;
        w2 += x * x;
    }
    return w2 > 0.0 ? w * w / w2 : 0.0;
}

std::size_t SampleCloud::size() const {
    std::size_t n = 0;
    for (const auto& [lt, s] : strata) n += s.samples.size();
    return n;
}

double SampleCloud::total_weight() const {
    double w = 0.0;
    for (const auto& [lt, s] : strata) w += s.total_weight();
    return w;
}

std::vector<Trajectory> SampleCloud::trajectories() const {
    std::vector<Trajectory> out;
    out.reserve(size());
    for (const auto& [lt, s] : strata) {
        for (const auto& x : s.samples) out.push_back(Trajectory::from_stacked(lt, x, state_dim));
    }
    return out;
}

TrajectorySampler::TrajectorySampler(const TrajectoryDensity& td) : td_(td) {
    require_valid(td);
    if (td.truncation && td.truncation->degenerate) {
        throw AcceptanceRateError("constrained density has zero acceptance probability");
    }
    std::vector<double> probs;
    for (const auto& e : td.pmf.entries) probs.push_back(e.probability);
    pick_ = std::discrete_distribution<std::size_t>(probs.begin(), probs.end());
    samplers_.resize(td.conditionals.size());
    for (std::size_t j = 0; j < td.conditionals.size(); ++j) {
        if (probs[j] > 0.0) samplers_[j].emplace(td.conditionals[j]);
    }
}

std::size_t TrajectorySampler::draw_stacked(Rng& rng, Eigen::VectorXd& out, std::size_t* proposals) const {
    constexpr std::size_t kMinProposals = 1000000;
    std::size_t tries = 0;
    for (;;) {
        const std::size_t j = pick_(rng);
        const auto& lt = td_.pmf.entries[j].lifetime;
        out.resize(static_cast<Eigen::Index>(lt.length() * td_.state_dim()));
        samplers_[j]->draw(rng, out);
        ++tries;
        if (proposals) ++*proposals;
        if (!td_.truncation ||
            detail::stacked_satisfies(td_.truncation->constraints, td_.truncation->pairs[j].active, lt, out,
                                      td_.state_dim())) {
            return j;
        }
        if (tries >= kMinProposals) {
            throw AcceptanceRateError("rejection sampling acceptance rate below 1e-6 after " +
                                      std::to_string(tries) + " proposals");
        }
    }
}

Trajectory TrajectorySampler::draw(Rng& rng, std::size_t* proposals) const {
    Eigen::VectorXd x;
    const auto j = draw_stacked(rng, x, proposals);
    return Trajectory::from_stacked(td_.pmf.entries[j].lifetime, x, td_.state_dim());
}

SampleCloud sample(const TrajectoryDensity& td, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("sample count must be >= 1");
    const TrajectorySampler sampler(td);
    SampleCloud cloud;
    cloud.state_dim = td.state_dim();
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        Eigen::VectorXd x;
        const auto j = sampler.draw_stacked(rng, x, &cloud.proposals);
        auto& stratum = cloud.strata[td.pmf.entries[j].lifetime];
        stratum.samples.push_back(std::move(x));
        stratum.weights.push_back(1.0);
    }
    return cloud;
}

TrajectoryDensity moment_match(const SampleCloud& cloud) {
    if (cloud.strata.empty()) throw std::invalid_argument("moment matching needs a nonempty sample cloud");
    TrajectoryDensity td;
    const double total = cloud.total_weight();
    if (!(total > 0.0)) throw std::invalid_argument("sample cloud has zero total weight");
    for (const auto& [lt, s] : cloud.strata) {
        if (s.effective_size() < 2.0) {
            throw std::invalid_argument("stratum " + describe(lt) + " has fewer than 2 effective samples");
        }
        StepMoments m;
        std::vector<const Eigen::VectorXd*> xs;
        for (const auto& x : s.samples) xs.push_back(&x);
        weighted_moments(xs, s.weights, 0, static_cast<Eigen::Index>(lt.length() * cloud.state_dim), m);
        GaussianSequence gs;
        gs.state_dim = cloud.state_dim;
        gs.mean = m.mean;
        gs.covariance = m.covariance;
        td.pmf.entries.push_back({lt, s.total_weight() / total});
        td.conditionals.push_back(std::move(gs));
    }
    return td;
}

std::vector<StepMoments> step_marginals(const TrajectoryDensity& td) {
    require_valid(td);
    if (td.truncation) throw std::invalid_argument("exact step marginals need an unconstrained density");
    if (td.pmf.entries.empty()) return {};
    Time first = td.pmf.entries.front().lifetime.birth;
    Time last = td.pmf.entries.front().lifetime.death;
    for (const auto& e : td.pmf.entries) {
        first = std::min(first, e.lifetime.birth);
        last = std::max(last, e.lifetime.death);
    }
    const auto d = static_cast<Eigen::Index>(td.state_dim());
    std::vector<StepMoments> out;
    for (Time t = first; t <= last; ++t) {
        double mass = 0.0;
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
        Eigen::MatrixXd second = Eigen::MatrixXd::Zero(d, d);
        for (std::size_t j = 0; j < td.pmf.size(); ++j) {
            const auto& e = td.pmf.entries[j];
            if (!e.lifetime.contains(t) || e.probability <= 0.0) continue;
            const auto off = block_offset(e.lifetime, t, td.state_dim());
            const auto& gs = td.conditionals[j];
            const Eigen::VectorXd m = gs.mean.segment(off, d);
            mass += e.probability;
            mean += e.probability * m;
            second += e.probability * (gs.covariance.block(off, off, d, d) + m * m.transpose());
        }
        if (mass <= 0.0) continue;
        StepMoments sm;
        sm.time = t;
        sm.alive_mass = mass;
        sm.mean = mean / mass;
        sm.covariance = second / mass - sm.mean * sm.mean.transpose();
        sm.covariance = 0.5 * (sm.covariance + sm.covariance.transpose()).eval();
        sm.mean_std_error = Eigen::VectorXd::Zero(d);
        sm.variance_std_error = Eigen::VectorXd::Zero(d);
        out.push_back(std::move(sm));
    }
    return out;
}

std::vector<StepMoments> step_moments(const SampleCloud& cloud) {
    if (cloud.strata.empty()) return {};
    Time first = cloud.strata.begin()->first.birth;
    Time last = cloud.strata.begin()->first.death;
    for (const auto& [lt, s] : cloud.strata) {
        first = std::min(first, lt.birth);
        last = std::max(last, lt.death);
    }
    const double total = cloud.total_weight();
    const auto d = static_cast<Eigen::Index>(cloud.state_dim);
    std::vector<StepMoments> out;
    for (Time t = first; t <= last; ++t) {
        std::vector<Eigen::VectorXd> blocks;
        std::vector<double> ws;
        for (const auto& [lt, s] : cloud.strata) {
            if (!lt.contains(t)) continue;
            const auto offset = block_offset(lt, t, cloud.state_dim);
            for (std::size_t i = 0; i < s.samples.size(); ++i) {
                blocks.push_back(s.samples[i].segment(offset, d));
                ws.push_back(s.weights[i]);
            }
        }
        if (blocks.empty()) continue;
        std::vector<const Eigen::VectorXd*> ptrs;
        ptrs.reserve(blocks.size());
        for (const auto& b : blocks) ptrs.push_back(&b);
        StepMoments sm;
        sm.time = t;
        weighted_moments(ptrs, ws, 0, d, sm);
        sm.alive_mass = total > 0.0 ? std::accumulate(ws.begin(), ws.end(), 0.0) / total : 0.0;
        out.push_back(std::move(sm));
    }
    return out;
}

double log_density(const TrajectoryDensity& td, const Trajectory& traj) {
    constexpr double kNegInf = -std::numeric_limits<double>::infinity();
    if (traj.state_dim() != td.state_dim()) {
        throw std::invalid_argument("trajectory dimension does not match density");
    }
    const auto j = td.pmf.index_of(traj.lifetime());
    if (!j || td.pmf.entries[*j].probability <= 0.0) return kNegInf;
    const Eigen::VectorXd x = traj.stacked();
    double log_scale = std::log(td.pmf.entries[*j].probability);
    if (td.truncation) {
        const auto& pt = td.truncation->pairs[*j];
        if (!detail::stacked_satisfies(td.truncation->constraints, pt.active, traj.lifetime(), x, traj.state_dim())) {
            return kNegInf;
        }
        if (pt.acceptance.value <= 0.0) return kNegInf;
        log_scale -= std::log(pt.acceptance.value);
    }
    const auto& gs = td.conditionals[*j];
    const Eigen::MatrixXd sym = 0.5 * (gs.covariance + gs.covariance.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
    const double tol = kCovTolerance * matrix_scale(sym);
    const Eigen::VectorXd r = eig.eigenvectors().transpose() * (x - gs.mean);
    double quad = 0.0, log_det = 0.0;
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        const double lambda = eig.eigenvalues()[i];
        if (lambda > tol) {
            quad += r[i] * r[i] / lambda;
            log_det += std::log(lambda);
            ++rank;
        } else if (std::abs(r[i]) > 1e-9 * std::sqrt(matrix_scale(sym))) {
            return kNegInf;
        }
    }
    return log_scale - 0.5 * (quad + log_det + static_cast<double>(rank) * std::log(2.0 * std::numbers::pi));
}

}  // namespace trajcon
