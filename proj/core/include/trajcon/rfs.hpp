#pragma once

/// @file rfs.hpp
/// Bernoulli, Poisson point process and PMBM densities over sets of
/// trajectories.

#include "trajcon/gaussian_sequence.hpp"
#include "trajcon/random.hpp"
#include "trajcon/trajectory.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace trajcon {

struct BernoulliTrajectory {
    double r = 0.0;
    TrajectoryDensity density;
    /// Set when constraining found no lifetime overlapping any constraint
    /// time; r is then 0 and `density` is the unconstrained input.
    bool degenerate = false;
};

/// Intensity mu * p(X).
struct PppTrajectory {
    double mu = 0.0;
    TrajectoryDensity density;
    /// mu == 0 after constraining; no trajectories survive.
    bool degenerate = false;
};

/// Association histories are not tracked; a hypothesis is its weight and its
/// Bernoulli components.
struct GlobalHypothesis {
    double weight = 0.0;
    std::vector<BernoulliTrajectory> tracks;
};

struct PmbmDensity {
    PppTrajectory ppp;
    std::vector<GlobalHypothesis> hypotheses;

    std::size_t state_dim() const { return ppp.density.state_dim(); }
    /// mu + sum_a w_a sum_i r_i
    double expected_cardinality() const;
};

/// Every violated invariant; empty iff the density is valid.
std::vector<std::string> validate(const BernoulliTrajectory& b);
std::vector<std::string> validate(const PppTrajectory& p);
std::vector<std::string> validate(const PmbmDensity& m);

/// Throws std::invalid_argument listing every violation.
void require_valid(const PmbmDensity& m);

/// Reusable samplers for repeated draws (oracles, simulations).
class BernoulliSampler {
public:
    explicit BernoulliSampler(const BernoulliTrajectory& b);
    std::vector<Trajectory> draw(Rng& rng) const;

private:
    double r_;
    std::optional<TrajectorySampler> inner_;
};

class PppSampler {
public:
    explicit PppSampler(const PppTrajectory& p);
    std::vector<Trajectory> draw(Rng& rng) const;

private:
    double mu_;
    std::optional<TrajectorySampler> inner_;
};

class PmbmSampler {
public:
    explicit PmbmSampler(const PmbmDensity& m);
    std::vector<Trajectory> draw(Rng& rng) const;

private:
    PppSampler ppp_;
    std::vector<std::vector<BernoulliSampler>> tracks_;
    mutable std::discrete_distribution<std::size_t> pick_;
};

std::vector<Trajectory> sample_bernoulli(const BernoulliTrajectory& b, Rng& rng);
std::vector<Trajectory> sample_bernoulli(const BernoulliTrajectory& b, std::uint64_t seed);

std::vector<Trajectory> sample_ppp(const PppTrajectory& p, Rng& rng);
std::vector<Trajectory> sample_ppp(const PppTrajectory& p, std::uint64_t seed);

/// Picks a hypothesis by weight, then unions one PPP draw with one draw per
/// track of that hypothesis.
std::vector<Trajectory> sample_pmbm(const PmbmDensity& m, Rng& rng);
std::vector<Trajectory> sample_pmbm(const PmbmDensity& m, std::uint64_t seed);

}  // namespace trajcon
