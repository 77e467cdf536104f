#pragma once

/// @file constrain.hpp
/// Constrained trajectory densities and constrained Bernoulli / PPP / PMBM
/// parameters for single, conjunct and disjunct constraint sets.
///
/// For a density p(X) = p(x | beta, epsilon) P(beta, epsilon) and a constraint
/// set C, the constrained density is p(X) restricted to the trajectories that
/// satisfy C, renormalized. Per lifetime the engine computes
///   - whether any constraint time falls inside the lifetime (temporal part),
///   - the probability s(beta, epsilon) that the conditional satisfies the
///     spatial part (all active regions for conjunct sets, at least one for
///     disjunct sets),
/// and from those the report Pr(alive), Pr(spatial | alive) and their product,
/// which scales r for Bernoulli components and mu for PPP components.
///
/// Disjunct sets additionally carry the explicit mixture over inside/outside
/// partitions of the active constraints.

#include "trajcon/gaussian_sequence.hpp"
#include "trajcon/random.hpp"
#include "trajcon/rfs.hpp"
#include "trajcon/trajectory.hpp"
#include "trajcon/truncation.hpp"

#include <cstddef>
#include <vector>

namespace trajcon {

/// Largest number of active constraints a disjunct pair may have.
inline constexpr std::size_t kMaxDisjunctActive = 20;

struct ConstrainedDensity {
    TrajectoryDensity density;  // truncation is always set
    ConstraintReport report;
};

/// Throws ZeroSupportError when no lifetime with positive mass overlaps a
/// constraint time, PartitionBudgetError when a disjunct pair has more than
/// kMaxDisjunctActive active constraints. Each lifetime's Monte Carlo stream
/// is seeded with derive_seed(mc.seed, pmf index).
ConstrainedDensity constrain_density(const TrajectoryDensity& td, const ConstraintSet& cs, const McOptions& mc);

/// r^C = r * joint. Zero temporal support gives a degenerate Bernoulli with
/// r = 0 instead of an error.
BernoulliTrajectory constrain_bernoulli(const BernoulliTrajectory& b, const ConstraintSet& cs, const McOptions& mc);

/// mu^C = mu * joint.
PppTrajectory constrain_ppp(const PppTrajectory& p, const ConstraintSet& cs, const McOptions& mc);

/// Constrains the PPP and every track with the same options; hypothesis
/// weights are copied unchanged.
PmbmDensity constrain_pmbm(const PmbmDensity& m, const ConstraintSet& cs, const McOptions& mc);

/// Report of a constrained density (the one stored in its truncation).
const ConstraintReport& report_of(const TrajectoryDensity& constrained);

struct RejectionDiagnostics {
    std::size_t proposals = 0;
    std::size_t accepted = 0;
    double acceptance_rate = 0.0;
};

struct ConstrainedMarginals {
    std::vector<StepMoments> steps;
    RejectionDiagnostics diagnostics;
    SampleCloud cloud;
};

/// Rejection-samples the base density (lifetimes drawn from the temporal pmf)
/// through the constraint indicators, mc.budget proposals in total, and moment
/// matches each time step. Throws AcceptanceRateError when the acceptance rate
/// falls below 1e-6.
ConstrainedMarginals constrained_marginals(const TrajectoryDensity& constrained, const McOptions& mc);

/// Moment-matched Gaussian per lifetime from the accepted samples. Lifetimes
/// with fewer than two accepted samples are dropped.
TrajectoryDensity gaussian_view(const TrajectoryDensity& constrained, const McOptions& mc);

}  // namespace trajcon
