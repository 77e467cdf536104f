#include "trajcon/trajectory.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace trajcon {

TimeWindow::TimeWindow(Time alpha, Time gamma) : alpha_(alpha), gamma_(gamma) {
    if (alpha > gamma) {
        throw std::invalid_argument("time window requires alpha <= gamma, got " +
                                    std::to_string(alpha) + " > " + std::to_string(gamma));
    }
}

std::vector<Lifetime> existence_pairs(const TimeWindow& window) {
    std::vector<Lifetime> pairs;
    const auto n = window.length();
    pairs.reserve(n * (n + 1) / 2);
    for (Time b = window.alpha(); b <= window.gamma(); ++b) {
        for (Time e = b; e <= window.gamma(); ++e) pairs.push_back({b, e});
    }
    return pairs;
}

Trajectory::Trajectory(Lifetime lifetime, Eigen::MatrixXd states)
    : lifetime_(lifetime), states_(std::move(states)) {
    if (lifetime_.birth > lifetime_.death) {
        throw std::invalid_argument("trajectory birth after death");
    }
    if (states_.rows() < 1) throw std::invalid_argument("trajectory state dimension must be >= 1");
    if (static_cast<std::size_t>(states_.cols()) != lifetime_.length()) {
        throw std::invalid_argument("trajectory has " + std::to_string(states_.cols()) +
                                    " states for a lifetime of length " +
                                    std::to_string(lifetime_.length()));
    }
}

Trajectory Trajectory::from_stacked(Lifetime lifetime, const Eigen::VectorXd& stacked,
                                    std::size_t state_dim) {
    if (state_dim == 0 || static_cast<std::size_t>(stacked.size()) != state_dim * lifetime.length()) {
        throw std::invalid_argument("stacked state vector does not match lifetime and dimension");
    }
    Eigen::MatrixXd states = Eigen::Map<const Eigen::MatrixXd>(
        stacked.data(), static_cast<Eigen::Index>(state_dim),
        static_cast<Eigen::Index>(lifetime.length()));
    return Trajectory(lifetime, std::move(states));
}

Eigen::VectorXd Trajectory::state(Time t) const {
    if (!lifetime_.contains(t)) {
        throw std::out_of_range("time " + std::to_string(t) + " outside trajectory lifetime");
    }
    return states_.col(static_cast<Eigen::Index>(t - lifetime_.birth));
}

Eigen::VectorXd Trajectory::stacked() const {
    return Eigen::Map<const Eigen::VectorXd>(states_.data(), states_.size());
}

bool operator==(const Trajectory& a, const Trajectory& b) {
    return a.lifetime_ == b.lifetime_ && a.states_.rows() == b.states_.rows() &&
           a.states_.cols() == b.states_.cols() && a.states_ == b.states_;
}

Box::Box(std::vector<Interval> intervals) : intervals_(std::move(intervals)) {
    if (intervals_.empty()) throw std::invalid_argument("box must have at least one dimension");
    for (std::size_t i = 0; i < intervals_.size(); ++i) {
        const auto& iv = intervals_[i];
        if (iv.lower && iv.upper && !(*iv.lower < *iv.upper)) {
            throw std::invalid_argument("box dimension " + std::to_string(i) +
                                        " requires lower < upper");
        }
    }
}

Box Box::unbounded(std::size_t dim) { return Box(std::vector<Interval>(dim)); }

bool Box::contains(const Eigen::Ref<const Eigen::VectorXd>& point) const {
    for (std::size_t i = 0; i < intervals_.size(); ++i) {
        if (!intervals_[i].contains(point[static_cast<Eigen::Index>(i)])) return false;
    }
    return true;
}

std::size_t Box::bounded_dims() const {
    return static_cast<std::size_t>(
        std::count_if(intervals_.begin(), intervals_.end(), [](const Interval& iv) { return iv.bounded(); }));
}

StateRegion::StateRegion(std::vector<Box> boxes) : boxes_(std::move(boxes)) {
    if (boxes_.empty()) throw std::invalid_argument("state region needs at least one box");
    for (const auto& b : boxes_) {
        if (b.dim() != boxes_.front().dim()) {
            throw std::invalid_argument("state region boxes differ in dimension");
        }
    }
}

StateRegion StateRegion::full_space(std::size_t dim) { return StateRegion(Box::unbounded(dim)); }

bool StateRegion::contains(const Eigen::Ref<const Eigen::VectorXd>& point) const {
    if (static_cast<std::size_t>(point.size()) != dim()) {
        throw std::invalid_argument("point dimension " + std::to_string(point.size()) +
                                    " does not match region dimension " + std::to_string(dim()));
    }
    return std::any_of(boxes_.begin(), boxes_.end(), [&](const Box& b) { return b.contains(point); });
}

bool StateRegion::is_full_space() const {
    return std::any_of(boxes_.begin(), boxes_.end(), [](const Box& b) { return b.bounded_dims() == 0; });
}

ConstraintSet::ConstraintSet(std::vector<Constraint> constraints, ConstraintMode mode)
    : constraints_(std::move(constraints)), mode_(mode) {
    if (constraints_.empty()) throw std::invalid_argument("constraint set must be nonempty");
    std::sort(constraints_.begin(), constraints_.end(),
              [](const Constraint& a, const Constraint& b) { return a.time < b.time; });
    for (std::size_t i = 1; i < constraints_.size(); ++i) {
        if (constraints_[i].time == constraints_[i - 1].time) {
            throw std::invalid_argument("duplicate constraint time " + std::to_string(constraints_[i].time) +
                                        "; merge the regions into one constraint");
        }
    }
    for (const auto& c : constraints_) {
        if (c.region.dim() != constraints_.front().region.dim()) {
            throw std::invalid_argument("constraint regions differ in dimension");
        }
    }
}

ConstraintSet ConstraintSet::with_mode(ConstraintMode mode) const {
    ConstraintSet copy = *this;
    copy.mode_ = mode;
    return copy;
}

ActiveConstraints active_constraints(const Lifetime& lifetime, const ConstraintSet& cs) {
    ActiveConstraints active;
    for (std::size_t i = 0; i < cs.size(); ++i) {
        if (lifetime.contains(cs[i].time)) {
            active.indices.push_back(i);
            active.times.push_back(cs[i].time);
        }
    }
    return active;
}

ActiveConstraints active_constraints(const Trajectory& traj, const ConstraintSet& cs) {
    return active_constraints(traj.lifetime(), cs);
}

bool satisfies(const Trajectory& traj, const ConstraintSet& cs) {
    if (traj.state_dim() != cs.state_dim()) {
        throw std::invalid_argument("trajectory state dimension " + std::to_string(traj.state_dim()) +
                                    " does not match constraint dimension " +
                                    std::to_string(cs.state_dim()));
    }
    const auto active = active_constraints(traj, cs);
    if (active.empty()) return false;
    const auto inside = [&](std::size_t i) {
        const auto& c = cs[i];
        return c.region.contains(traj.states().col(static_cast<Eigen::Index>(c.time - traj.birth())));
    };
    if (cs.mode() == ConstraintMode::conjunct) {
        return std::all_of(active.indices.begin(), active.indices.end(), inside);
    }
    return std::any_of(active.indices.begin(), active.indices.end(), inside);
}

std::vector<Trajectory> tau(const Trajectory& traj, const ConstraintSet& cs) {
    if (satisfies(traj, cs)) return {traj};
    return {};
}

std::vector<Trajectory> tau_set(std::span<const Trajectory> trajs, const ConstraintSet& cs) {
    std::vector<Trajectory> out;
    for (const auto& t : trajs) {
        if (satisfies(t, cs)) out.push_back(t);
    }
    return out;
}

ConstraintSet time_window_constraints(Time eta, Time zeta, std::size_t state_dim) {
    if (eta > zeta) {
        throw std::invalid_argument("time window constraints require eta <= zeta");
    }
    std::vector<Constraint> cs;
    cs.reserve(static_cast<std::size_t>(zeta - eta + 1));
    for (Time t = eta; t <= zeta; ++t) cs.push_back({t, StateRegion::full_space(state_dim)});
    return ConstraintSet(std::move(cs), ConstraintMode::disjunct);
}

}  // namespace trajcon
