#pragma once

#include "trajcon/trajectory.hpp"

#include <Eigen/Dense>

#include <algorithm>

namespace trajcon::detail {

inline bool block_inside(const StateRegion& region, const Eigen::VectorXd& stacked, Eigen::Index offset,
                         std::size_t state_dim) {
    return region.contains(stacked.segment(offset, static_cast<Eigen::Index>(state_dim)));
}

/// Constraint-set indicator evaluated on a stacked state vector of a known
/// lifetime, given its precomputed active constraints.
inline bool stacked_satisfies(const ConstraintSet& cs, const ActiveConstraints& active, const Lifetime& lifetime,
                              const Eigen::VectorXd& stacked, std::size_t state_dim) {
    if (active.empty()) return false;
    const auto inside = [&](std::size_t i) {
        const auto offset = static_cast<Eigen::Index>((cs[i].time - lifetime.birth) *
                                                      static_cast<Time>(state_dim));
        return block_inside(cs[i].region, stacked, offset, state_dim);
    };
    if (cs.mode() == ConstraintMode::conjunct) {
        return std::all_of(active.indices.begin(), active.indices.end(), inside);
    }
    return std::any_of(active.indices.begin(), active.indices.end(), inside);
}

}  // namespace trajcon::detail
