#pragma once

/// @file trajectory.hpp
/// Trajectory values, time bookkeeping, state-space regions and the
/// constraint-set filter that maps sets of trajectories to the subset
/// satisfying a set of spatiotemporal constraints.

#include <Eigen/Dense>

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace trajcon {

using Time = std::int64_t;

/// Closed range of consecutive time steps alpha..gamma.
class TimeWindow {
public:
    TimeWindow(Time alpha, Time gamma);

    Time alpha() const { return alpha_; }
    Time gamma() const { return gamma_; }
    std::size_t length() const { return static_cast<std::size_t>(gamma_ - alpha_ + 1); }
    bool contains(Time t) const { return alpha_ <= t && t <= gamma_; }

    friend bool operator==(const TimeWindow&, const TimeWindow&) = default;

private:
    Time alpha_;
    Time gamma_;
};

/// Birth and death time (beta, epsilon) of a trajectory; ordered
/// lexicographically.
struct Lifetime {
    Time birth = 0;
    Time death = 0;

    std::size_t length() const { return static_cast<std::size_t>(death - birth + 1); }
    bool contains(Time t) const { return birth <= t && t <= death; }
    bool overlaps(Time first, Time last) const { return birth <= last && first <= death; }

    friend auto operator<=>(const Lifetime&, const Lifetime&) = default;
};

/// Every lifetime inside the window, in lexicographic order.
std::vector<Lifetime> existence_pairs(const TimeWindow& window);

/// A trajectory: lifetime plus one state column per alive time step.
class Trajectory {
public:
    Trajectory(Lifetime lifetime, Eigen::MatrixXd states);
    /// Builds from a stacked vector (time-major, state_dim entries per step).
    static Trajectory from_stacked(Lifetime lifetime, const Eigen::VectorXd& stacked,
                                   std::size_t state_dim);

    const Lifetime& lifetime() const { return lifetime_; }
    Time birth() const { return lifetime_.birth; }
    Time death() const { return lifetime_.death; }
    std::size_t length() const { return lifetime_.length(); }
    std::size_t state_dim() const { return static_cast<std::size_t>(states_.rows()); }

    /// State at absolute time t; t must be inside the lifetime.
    Eigen::VectorXd state(Time t) const;
    const Eigen::MatrixXd& states() const { return states_; }
    Eigen::VectorXd stacked() const;

    friend bool operator==(const Trajectory& a, const Trajectory& b);

private:
    Lifetime lifetime_;
    Eigen::MatrixXd states_;  // state_dim x length
};

/// Closed interval with optional ends; a missing end is unbounded.
struct Interval {
    std::optional<double> lower;
    std::optional<double> upper;

    bool bounded() const { return lower.has_value() || upper.has_value(); }
    bool contains(double v) const {
        return (!lower || *lower <= v) && (!upper || v <= *upper);
    }
    friend bool operator==(const Interval&, const Interval&) = default;
};

/// Axis-aligned box in R^d.
class Box {
public:
    explicit Box(std::vector<Interval> intervals);
    static Box unbounded(std::size_t dim);

    std::size_t dim() const { return intervals_.size(); }
    const std::vector<Interval>& intervals() const { return intervals_; }
    const Interval& operator[](std::size_t i) const { return intervals_[i]; }
    bool contains(const Eigen::Ref<const Eigen::VectorXd>& point) const;
    std::size_t bounded_dims() const;

    friend bool operator==(const Box&, const Box&) = default;

private:
    std::vector<Interval> intervals_;
};

/// Finite union of boxes. The complement is handled by negating membership.
class StateRegion {
public:
    explicit StateRegion(std::vector<Box> boxes);
    explicit StateRegion(Box box) : StateRegion(std::vector<Box>{std::move(box)}) {}
    /// The whole state space.
    static StateRegion full_space(std::size_t dim);

    std::size_t dim() const { return boxes_.front().dim(); }
    const std::vector<Box>& boxes() const { return boxes_; }
    bool contains(const Eigen::Ref<const Eigen::VectorXd>& point) const;
    bool is_full_space() const;

    friend bool operator==(const StateRegion&, const StateRegion&) = default;

private:
    std::vector<Box> boxes_;
};

struct Constraint {
    Time time = 0;
    StateRegion region;
};

enum class ConstraintMode { conjunct, disjunct };

/// Nonempty set of constraints at pairwise distinct times, kept in
/// ascending time order.
class ConstraintSet {
public:
    ConstraintSet(std::vector<Constraint> constraints, ConstraintMode mode);

    const std::vector<Constraint>& constraints() const { return constraints_; }
    const Constraint& operator[](std::size_t i) const { return constraints_[i]; }
    std::size_t size() const { return constraints_.size(); }
    ConstraintMode mode() const { return mode_; }
    std::size_t state_dim() const { return constraints_.front().region.dim(); }

    /// Same constraints under a different mode.
    ConstraintSet with_mode(ConstraintMode mode) const;

private:
    std::vector<Constraint> constraints_;
    ConstraintMode mode_;
};

/// Constraints whose time falls inside a lifetime.
struct ActiveConstraints {
    std::vector<std::size_t> indices;
    std::vector<Time> times;

    bool empty() const { return indices.empty(); }
    std::size_t size() const { return indices.size(); }
};

ActiveConstraints active_constraints(const Lifetime& lifetime, const ConstraintSet& cs);
ActiveConstraints active_constraints(const Trajectory& traj, const ConstraintSet& cs);

/// Throws std::invalid_argument when the state dimension differs from the
/// constraint regions.
bool satisfies(const Trajectory& traj, const ConstraintSet& cs);

/// {traj} if it satisfies the set, otherwise empty.
std::vector<Trajectory> tau(const Trajectory& traj, const ConstraintSet& cs);
std::vector<Trajectory> tau_set(std::span<const Trajectory> trajs, const ConstraintSet& cs);

/// Disjunct full-space constraints at every step eta..zeta: "alive at some
/// point in the interval".
ConstraintSet time_window_constraints(Time eta, Time zeta, std::size_t state_dim);

}  // namespace trajcon
