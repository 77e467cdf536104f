#pragma once

#include "trajcon/random.hpp"
#include "trajcon/trajectory.hpp"

#include <cstdint>
#include <vector>

namespace trajcon {

/// Temporal and spatial satisfaction probabilities of a constraint set under a
/// trajectory density.
struct ConstraintReport {
    /// Pr(at least one constraint time inside the lifetime).
    Estimate prob_alive;
    /// Mode-appropriate spatial probability given alive, averaged over the
    /// qualifying lifetimes with pmf weights.
    Estimate prob_spatial;
    /// prob_alive * prob_spatial.
    Estimate joint;
};

/// One disjunct partition: active constraints in `inside_mask` hold, the rest
/// are violated. Bit j refers to the j-th active constraint of the pair.
struct PartitionTerm {
    std::uint32_t inside_mask = 0;
    double weight = 0.0;      // normalized over partitions with a nonempty inside set
    double raw_weight = 0.0;  // probability mass of the partition
    double raw_std_error = 0.0;
};

/// Truncation data for one lifetime in the pmf support.
struct PairTruncation {
    ActiveConstraints active;
    /// Probability that the base conditional satisfies the constraints.
    Estimate acceptance;
    /// Disjunct mode only.
    std::vector<PartitionTerm> partitions;
};

/// Structure attached to a density after constraining. The conditionals stay
/// the untruncated Gaussians; this records which indicator truncates each one.
struct Truncation {
    ConstraintSet constraints;
    /// Aligned with the pmf entries of the owning density.
    std::vector<PairTruncation> pairs;
    /// P(beta, epsilon) / Pr(alive) on lifetimes overlapping a constraint time.
    std::vector<double> temporal_pmf;
    ConstraintReport report;
    /// Zero spatial probability everywhere; the density cannot be sampled.
    bool degenerate = false;
};

}  // namespace trajcon
