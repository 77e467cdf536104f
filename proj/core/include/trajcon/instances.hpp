#pragma once

/// @file instances.hpp
/// Random small problem instances for property tests, the acceptance suite
/// and benchmarks. Conditionals are Gaussian random walks with drift; the
/// pmf is Dirichlet over a random subset of lifetimes; constraint boxes are
/// placed around the probability mass so acceptance rates are moderate.

#include "trajcon/gaussian_sequence.hpp"
#include "trajcon/random.hpp"
#include "trajcon/rfs.hpp"
#include "trajcon/trajectory.hpp"

#include <cstddef>
#include <optional>

namespace trajcon {

struct InstanceOptions {
    std::size_t max_state_dim = 2;
    std::size_t max_window = 10;
    std::size_t max_support = 8;
    std::size_t max_constraints = 4;
};

struct InstanceShape {
    std::size_t state_dim = 1;
    TimeWindow window{0, 0};
};

InstanceShape random_shape(Rng& rng, const InstanceOptions& options = {});

/// Random walk x_{k+1} = x_k + v + w over one lifetime.
GaussianSequence random_walk_sequence(Rng& rng, const Lifetime& lifetime, std::size_t state_dim);

TrajectoryDensity random_density(Rng& rng, const InstanceShape& shape, const InstanceOptions& options = {});

/// 1..max_constraints constraints at distinct times drawn from the support
/// lifetimes of `td`, so at least one support lifetime is always active.
/// `count` fixes the number of constraints (capped by the available times).
ConstraintSet random_constraint_set(Rng& rng, const TrajectoryDensity& td, ConstraintMode mode,
                                    const InstanceOptions& options = {},
                                    std::optional<std::size_t> count = std::nullopt);

BernoulliTrajectory random_bernoulli(Rng& rng, const InstanceShape& shape, const InstanceOptions& options = {});
PppTrajectory random_ppp(Rng& rng, const InstanceShape& shape, const InstanceOptions& options = {});
/// 1..3 hypotheses with 0..3 tracks each.
PmbmDensity random_pmbm(Rng& rng, const InstanceShape& shape, const InstanceOptions& options = {});

}  // namespace trajcon
