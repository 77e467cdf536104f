#pragma once

/// @file gaussian_sequence.hpp
/// Linear-Gaussian trajectory densities over (birth, death) hypotheses:
/// marginalization onto time subsets, box probabilities, sampling and moment
/// matching.

#include "trajcon/random.hpp"
#include "trajcon/trajectory.hpp"
#include "trajcon/truncation.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace trajcon {

struct PmfEntry {
    Lifetime lifetime;
    double probability = 0.0;
};

/// Probability mass over lifetimes.
struct BirthDeathPmf {
    std::vector<PmfEntry> entries;

    std::size_t size() const { return entries.size(); }
    std::optional<std::size_t> index_of(const Lifetime& lt) const;
    double probability(const Lifetime& lt) const;

    static BirthDeathPmf uniform(std::span<const Lifetime> support);
};

/// Joint Gaussian over the stacked states of one lifetime. Time step t
/// occupies rows (t - birth) * state_dim .. (t - birth) * state_dim + state_dim - 1.
struct GaussianSequence {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;
    std::size_t state_dim = 1;

    std::size_t blocks() const { return static_cast<std::size_t>(mean.size()) / state_dim; }
};

/// pmf over lifetimes with one Gaussian conditional per support entry. When
/// `truncation` is set the density is the constrained one: the pmf is the
/// constrained pmf and each conditional is restricted by its indicator.
struct TrajectoryDensity {
    BirthDeathPmf pmf;
    std::vector<GaussianSequence> conditionals;
    std::optional<Truncation> truncation;

    std::size_t state_dim() const { return conditionals.empty() ? 0 : conditionals.front().state_dim; }
    bool constrained() const { return truncation.has_value(); }
};

/// Problems with each invariant; empty means valid.
std::vector<std::string> check_pmf(const BirthDeathPmf& pmf);
std::vector<std::string> check_gaussian(const GaussianSequence& gs);
std::vector<std::string> check_density(const TrajectoryDensity& td);

/// Throws std::invalid_argument listing every violation.
void require_valid(const TrajectoryDensity& td);

/// Exact rows/columns of the joint for the given times, ascending.
GaussianSequence marginal(const GaussianSequence& gs, const Lifetime& lifetime,
                          std::span<const Time> times);

enum class Side { inside, complement };

struct RegionQuery {
    Time time = 0;
    StateRegion region;
    Side side = Side::inside;
};

/// Probability that every queried state falls on its side of its region.
/// Exact when the bounded coordinates are mutually uncorrelated and each
/// region is a single box; plain Monte Carlo on the marginal otherwise.
Estimate region_probability(const GaussianSequence& gs, const Lifetime& lifetime,
                            std::span<const RegionQuery> queries, const McOptions& mc);

/// Probability of each inside/outside pattern over the given constraints:
/// entry m is Pr(exactly the constraints whose bit is set in m are inside).
/// The Monte Carlo path uses one sample stream for all patterns, and shares
/// it with region_probability for the same options.
std::vector<Estimate> inside_pattern_probabilities(const GaussianSequence& gs, const Lifetime& lifetime,
                                                   std::span<const Constraint> constraints,
                                                   const McOptions& mc);

template <class Predicate>
double alive_probability(const BirthDeathPmf& pmf, Predicate&& pred) {
    double total = 0.0;
    for (const auto& e : pmf.entries) {
        if (pred(e.lifetime)) total += e.probability;
    }
    return total;
}

/// Draws from N(mean, covariance) through a symmetric square root, so
/// positive-semidefinite covariances are fine.
class GaussianSampler {
public:
    explicit GaussianSampler(const GaussianSequence& gs);

    void draw(Rng& rng, Eigen::VectorXd& out) const;
    Eigen::VectorXd draw(Rng& rng) const;
    std::size_t dim() const { return static_cast<std::size_t>(mean_.size()); }

private:
    Eigen::VectorXd mean_;
    Eigen::MatrixXd factor_;
    mutable Eigen::VectorXd scratch_;
};

/// Draws whole trajectories from a (possibly constrained) density; holds the
/// factorized covariances so repeated draws stay cheap.
class TrajectorySampler {
public:
    explicit TrajectorySampler(const TrajectoryDensity& td);

    /// One trajectory; `proposals` (if given) is incremented per proposal.
    Trajectory draw(Rng& rng, std::size_t* proposals = nullptr) const;
    /// Lifetime index and stacked states, without building a Trajectory.
    std::size_t draw_stacked(Rng& rng, Eigen::VectorXd& out, std::size_t* proposals = nullptr) const;

    const TrajectoryDensity& density() const { return td_; }

private:
    TrajectoryDensity td_;
    std::vector<std::optional<GaussianSampler>> samplers_;
    mutable std::discrete_distribution<std::size_t> pick_;
};

struct Stratum {
    std::vector<Eigen::VectorXd> samples;  // stacked states
    std::vector<double> weights;

    double total_weight() const;
    double effective_size() const;
};

struct SampleCloud {
    std::size_t state_dim = 1;
    std::map<Lifetime, Stratum> strata;
    /// Proposals drawn, including rejected ones.
    std::size_t proposals = 0;

    std::size_t size() const;
    double total_weight() const;
    std::vector<Trajectory> trajectories() const;
};

/// n draws, lifetime first then states. Constrained densities are sampled by
/// rejection against their indicators.
SampleCloud sample(const TrajectoryDensity& td, std::size_t n, std::uint64_t seed);

/// Weighted per-stratum mean/covariance; pmf proportional to stratum weights.
TrajectoryDensity moment_match(const SampleCloud& cloud);

/// Mean and covariance of the state at one time step, over every lifetime
/// alive at that step.
struct StepMoments {
    Time time = 0;
    double alive_mass = 0.0;
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;
    /// Monte Carlo standard errors (zero for exact moments).
    Eigen::VectorXd mean_std_error;
    Eigen::VectorXd variance_std_error;
    std::size_t samples = 0;
};

/// Exact per-step moments of an unconstrained density.
std::vector<StepMoments> step_marginals(const TrajectoryDensity& td);

/// Per-step moments of a sample cloud.
std::vector<StepMoments> step_moments(const SampleCloud& cloud);

/// log p(X); -inf outside the support or outside a truncation indicator.
double log_density(const TrajectoryDensity& td, const Trajectory& traj);

double normal_cdf(double x);

}  // namespace trajcon
