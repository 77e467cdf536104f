#include "trajcon/instances.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace trajcon {
namespace {

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

std::size_t uniform_index(Rng& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

std::vector<double> dirichlet(Rng& rng, std::size_t n) {
    std::gamma_distribution<double> g(1.0, 1.0);
    std::vector<double> w(n);
    double total = 0.0;
    for (auto& x : w) {
        x = g(rng) + 1e-3;
        total += x;
    }
    for (auto& x : w) x /= total;
    return w;
}

/// Mixture mean and standard deviation of the state at time t.
std::pair<Eigen::VectorXd, Eigen::VectorXd> step_location(const TrajectoryDensity& td, Time t) {
    const auto d = static_cast<Eigen::Index>(td.state_dim());
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d), second = Eigen::VectorXd::Zero(d);
    double mass = 0.0;
    for (std::size_t j = 0; j < td.pmf.size(); ++j) {
        const auto& e = td.pmf.entries[j];
        if (!e.lifetime.contains(t) || e.probability <= 0.0) continue;
        const auto& gs = td.conditionals[j];
        const auto off = static_cast<Eigen::Index>(t - e.lifetime.birth) * d;
        const Eigen::VectorXd m = gs.mean.segment(off, d);
        const Eigen::VectorXd v = gs.covariance.block(off, off, d, d).diagonal();
        mean += e.probability * m;
        second += e.probability * (v + m.cwiseProduct(m));
        mass += e.probability;
    }
    mean /= mass;
    second /= mass;
    const Eigen::VectorXd sd = (second - mean.cwiseProduct(mean)).cwiseMax(1e-12).cwiseSqrt();
    return {mean, sd};
}

Box random_box(Rng& rng, const Eigen::VectorXd& center, const Eigen::VectorXd& sd) {
    std::vector<Interval> ivs;
    for (Eigen::Index i = 0; i < center.size(); ++i) {
        const double c = center[i] + uniform(rng, -1.0, 1.0) * sd[i];
        const double half = uniform(rng, 0.3, 2.0) * sd[i];
        const double kind = uniform(rng, 0.0, 1.0);
        Interval iv;
        if (kind < 0.6) {
            iv = {c - half, c + half};
        } else if (kind < 0.75) {
            iv.lower = c - half;
        } else if (kind < 0.9) {
            iv.upper = c + half;
        }
        ivs.push_back(iv);
    }
    return Box(std::move(ivs));
}

}  // namespace

InstanceShape random_shape(Rng& rng, const InstanceOptions& options) {
    if (options.max_state_dim < 1 || options.max_window < 1) throw std::invalid_argument("empty instance shape");
    const auto d = uniform_index(rng, 1, options.max_state_dim);
    const auto len = uniform_index(rng, std::min<std::size_t>(2, options.max_window), options.max_window);
    return {d, TimeWindow(0, static_cast<Time>(len) - 1)};
}

GaussianSequence random_walk_sequence(Rng& rng, const Lifetime& lifetime, std::size_t state_dim) {
    const auto d = static_cast<Eigen::Index>(state_dim);
    const auto n = static_cast<Eigen::Index>(lifetime.length());
    std::normal_distribution<double> normal;
    Eigen::VectorXd start(d), drift(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        start[i] = 2.0 * normal(rng);
        drift[i] = 0.5 * normal(rng);
    }
    // Initial and step covariances L L^T + diag so they are positive definite.
    const auto random_cov = [&](double lo, double hi) {
        Eigen::MatrixXd l(d, d);
        for (Eigen::Index i = 0; i < d; ++i)
            for (Eigen::Index j = 0; j < d; ++j) l(i, j) = 0.4 * normal(rng);
        Eigen::MatrixXd c = l * l.transpose();
        for (Eigen::Index i = 0; i < d; ++i) c(i, i) += uniform(rng, lo, hi);
        return c;
    };
    const Eigen::MatrixXd p0 = random_cov(0.5, 2.0);
    const Eigen::MatrixXd q = random_cov(0.1, 1.0);

    GaussianSequence gs;
    gs.state_dim = state_dim;
    gs.mean.resize(n * d);
    gs.covariance.resize(n * d, n * d);
    for (Eigen::Index a = 0; a < n; ++a) {
        gs.mean.segment(a * d, d) = start + static_cast<double>(a) * drift;
        for (Eigen::Index b = 0; b < n; ++b) {
            gs.covariance.block(a * d, b * d, d, d) = p0 + static_cast<double>(std::min(a, b)) * q;
        }
    }
    return gs;
}

TrajectoryDensity random_density(Rng& rng, const InstanceShape& shape, const InstanceOptions& options) {
    auto pairs = existence_pairs(shape.window);
    std::shuffle(pairs.begin(), pairs.end(), rng);
    const auto k = uniform_index(rng, 1, std::min(options.max_support, pairs.size()));
    pairs.resize(k);
    std::sort(pairs.begin(), pairs.end());
    const auto w = dirichlet(rng, k);
    TrajectoryDensity td;
    for (std::size_t j = 0; j < k; ++j) {
        td.pmf.entries.push_back({pairs[j], w[j]});
        td.conditionals.push_back(random_walk_sequence(rng, pairs[j], shape.state_dim));
    }
    return td;
}

ConstraintSet random_constraint_set(Rng& rng, const TrajectoryDensity& td, ConstraintMode mode,
                                    const InstanceOptions& options, std::optional<std::size_t> count) {
    std::set<Time> available;
    for (const auto& e : td.pmf.entries) {
        if (e.probability <= 0.0) continue;
        for (Time t = e.lifetime.birth; t <= e.lifetime.death; ++t) available.insert(t);
    }
    if (available.empty()) throw std::invalid_argument("density has no support");
    std::vector<Time> times(available.begin(), available.end());
    std::shuffle(times.begin(), times.end(), rng);
    std::size_t n = count ? *count : uniform_index(rng, 1, std::max<std::size_t>(1, options.max_constraints));
    n = std::clamp<std::size_t>(n, 1, times.size());
    times.resize(n);

    std::vector<Constraint> cs;
    for (Time t : times) {
        const auto [center, sd] = step_location(td, t);
        std::vector<Box> boxes{random_box(rng, center, sd)};
        if (uniform(rng, 0.0, 1.0) < 0.2) boxes.push_back(random_box(rng, center, sd));
        cs.push_back({t, StateRegion(std::move(boxes))});
    }
    return ConstraintSet(std::move(cs), mode);
}

BernoulliTrajectory random_bernoulli(Rng& rng, const InstanceShape& shape, const InstanceOptions& options) {
    BernoulliTrajectory b;
    b.r = uniform(rng, 0.3, 1.0);
    b.density = random_density(rng, shape, options);
    return b;
}

PppTrajectory random_ppp(Rng& rng, const InstanceShape& shape, const InstanceOptions& options) {
    PppTrajectory p;
    p.mu = uniform(rng, 1.0, 10.0);
    p.density = random_density(rng, shape, options);
    return p;
}

PmbmDensity random_pmbm(Rng& rng, const InstanceShape& shape, const InstanceOptions& options) {
    PmbmDensity m;
    m.ppp = random_ppp(rng, shape, options);
    const auto h = uniform_index(rng, 1, 3);
    const auto w = dirichlet(rng, h);
    for (std::size_t a = 0; a < h; ++a) {
        GlobalHypothesis gh;
        gh.weight = w[a];
        const auto tracks = uniform_index(rng, 0, 3);
        for (std::size_t i = 0; i < tracks; ++i) gh.tracks.push_back(random_bernoulli(rng, shape, options));
        m.hypotheses.push_back(std::move(gh));
    }
    return m;
}

}  // namespace trajcon
