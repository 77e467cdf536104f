#include "trajcon/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace trajcon {
namespace {

bool is_psd(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) return false;
    if (m.size() == 0) return true;
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) return false;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
    return eig.eigenvalues().minCoeff() >= -1e-10 * scale;
}

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

GaussianSequence zero_mean(const Eigen::MatrixXd& cov) {
    GaussianSequence gs;
    gs.state_dim = static_cast<std::size_t>(cov.rows());
    gs.mean = Eigen::VectorXd::Zero(cov.rows());
    gs.covariance = cov;
    return gs;
}

void require(const std::vector<std::string>& issues, const char* what) {
    if (issues.empty()) return;
    std::string msg = std::string("invalid ") + what + ":";
    for (const auto& s : issues) msg += "\n  " + s;
    throw std::invalid_argument(msg);
}

}  // namespace

std::vector<std::string> check_motion(const MotionModel& mm) {
    std::vector<std::string> issues;
    const auto d = mm.transition.rows();
    if (d < 1 || mm.transition.cols() != d) issues.emplace_back("transition matrix must be square and nonempty");
    if (mm.process_noise.rows() != d || !is_psd(mm.process_noise)) {
        issues.emplace_back("process noise must be a d x d positive semidefinite matrix");
    }
    if (!is_probability(mm.survival)) issues.emplace_back("survival probability outside [0,1]");
    if (!(mm.birth_rate >= 0.0) || !std::isfinite(mm.birth_rate)) issues.emplace_back("birth rate must be >= 0");
    if (mm.birth_mean.size() != d) issues.emplace_back("birth mean has the wrong dimension");
    if (mm.birth_covariance.rows() != d || !is_psd(mm.birth_covariance)) {
        issues.emplace_back("birth covariance must be a d x d positive semidefinite matrix");
    }
    for (const auto& b : mm.scheduled_births) {
        if (b.state && b.state->size() != d) issues.emplace_back("scheduled birth state has the wrong dimension");
    }
    return issues;
}

std::vector<std::string> check_sensor(const SensorModel& sm, std::size_t state_dim) {
    std::vector<std::string> issues;
    const auto m = sm.measurement.rows();
    if (m < 1 || sm.measurement.cols() != static_cast<Eigen::Index>(state_dim)) {
        issues.emplace_back("measurement matrix must be m x d");
    }
    if (sm.noise.rows() != m || !is_psd(sm.noise)) {
        issues.emplace_back("measurement noise must be an m x m positive semidefinite matrix");
    }
    if (!is_probability(sm.detection)) issues.emplace_back("detection probability outside [0,1]");
    if (!(sm.clutter_rate >= 0.0) || !std::isfinite(sm.clutter_rate)) issues.emplace_back("clutter rate must be >= 0");
    if (sm.clutter_rate > 0.0) {
        if (!sm.clutter_region) {
            issues.emplace_back("clutter rate > 0 needs a clutter region");
        } else if (sm.clutter_region->dim() != static_cast<std::size_t>(m)) {
            issues.emplace_back("clutter region has the wrong dimension");
        } else {
            for (const auto& iv : sm.clutter_region->intervals()) {
                if (!iv.lower || !iv.upper) issues.emplace_back("clutter region must be bounded in every dimension");
            }
        }
    }
    return issues;
}

std::vector<Trajectory> simulate_truth(const MotionModel& mm, const TimeWindow& window, std::uint64_t seed) {
    require(check_motion(mm), "motion model");
    const auto d = static_cast<Eigen::Index>(mm.state_dim());
    Rng rng(seed);
    const GaussianSampler process(zero_mean(mm.process_noise));
    GaussianSequence birth;
    birth.state_dim = mm.state_dim();
    birth.mean = mm.birth_mean;
    birth.covariance = mm.birth_covariance;
    const GaussianSampler birth_sampler(birth);
    std::bernoulli_distribution survive(mm.survival);

    struct Alive {
        Time birth;
        std::vector<Eigen::VectorXd> states;
    };
    std::vector<Alive> alive;
    std::vector<Trajectory> done;
    const auto close = [&](Alive& a) {
        Eigen::MatrixXd states(d, static_cast<Eigen::Index>(a.states.size()));
        for (std::size_t k = 0; k < a.states.size(); ++k) states.col(static_cast<Eigen::Index>(k)) = a.states[k];
        const Time death = a.birth + static_cast<Time>(a.states.size()) - 1;
        done.emplace_back(Lifetime{a.birth, death}, std::move(states));
    };

    Eigen::VectorXd noise(d);
    for (Time t = window.alpha(); t <= window.gamma(); ++t) {
        std::vector<Alive> next;
        for (auto& a : alive) {
            if (!survive(rng)) {
                close(a);
                continue;
            }
            process.draw(rng, noise);
            a.states.push_back(mm.transition * a.states.back() + noise);
            next.push_back(std::move(a));
        }
        alive = std::move(next);

        for (const auto& sb : mm.scheduled_births) {
            if (sb.time != t) continue;
            alive.push_back({t, {sb.state ? *sb.state : birth_sampler.draw(rng)}});
        }
        if (mm.birth_rate > 0.0) {
            std::poisson_distribution<int> births(mm.birth_rate);
            const int n = births(rng);
            for (int i = 0; i < n; ++i) alive.push_back({t, {birth_sampler.draw(rng)}});
        }
    }
    for (auto& a : alive) close(a);
    std::stable_sort(done.begin(), done.end(),
                     [](const Trajectory& a, const Trajectory& b) { return a.birth() < b.birth(); });
    return done;
}

std::vector<MeasurementScan> simulate_measurements(std::span<const Trajectory> truth, const SensorModel& sm,
                                                   const TimeWindow& window, std::uint64_t seed) {
    const std::size_t d = truth.empty() ? static_cast<std::size_t>(sm.measurement.cols()) : truth.front().state_dim();
    require(check_sensor(sm, d), "sensor model");
    Rng rng(seed);
    const GaussianSampler noise(zero_mean(sm.noise));
    std::bernoulli_distribution detect(sm.detection);
    std::vector<MeasurementScan> scans;
    Eigen::VectorXd v(sm.noise.rows());
    for (Time t = window.alpha(); t <= window.gamma(); ++t) {
        MeasurementScan scan{t, {}};
        for (std::size_t i = 0; i < truth.size(); ++i) {
            if (!truth[i].lifetime().contains(t)) continue;
            if (!detect(rng)) continue;
            noise.draw(rng, v);
            scan.measurements.push_back({sm.measurement * truth[i].state(t) + v, i});
        }
        if (sm.clutter_rate > 0.0) {
            std::poisson_distribution<int> count(sm.clutter_rate);
            const int n = count(rng);
            const auto& box = *sm.clutter_region;
            for (int c = 0; c < n; ++c) {
                Eigen::VectorXd z(static_cast<Eigen::Index>(box.dim()));
                for (std::size_t k = 0; k < box.dim(); ++k) {
                    std::uniform_real_distribution<double> u(*box[k].lower, *box[k].upper);
                    z[static_cast<Eigen::Index>(k)] = u(rng);
                }
                scan.measurements.push_back({std::move(z), std::nullopt});
            }
        }
        scans.push_back(std::move(scan));
    }
    return scans;
}

Scenario simulate_scenario(const MotionModel& mm, const SensorModel& sm, const TimeWindow& window,
                           std::uint64_t seed) {
    Scenario sc{window, simulate_truth(mm, window, derive_seed(seed, 1)), {}};
    sc.scans = simulate_measurements(sc.truth, sm, window, derive_seed(seed, 2));
    return sc;
}

std::vector<TimedMeasurement> associated_measurements(const Scenario& scenario, std::size_t truth_index) {
    std::vector<TimedMeasurement> out;
    for (const auto& scan : scenario.scans) {
        for (const auto& m : scan.measurements) {
            if (m.truth_index && *m.truth_index == truth_index) out.push_back({scan.time, m.z});
        }
    }
    return out;
}

SmoothedSequence smooth_lifetime(std::span<const TimedMeasurement> measurements, const MotionModel& mm,
                                 const SensorModel& sm, const Lifetime& lifetime) {
    require(check_motion(mm), "motion model");
    require(check_sensor(sm, mm.state_dim()), "sensor model");
    const auto d = static_cast<Eigen::Index>(mm.state_dim());
    const auto n = static_cast<std::size_t>(lifetime.length());
    const Eigen::MatrixXd& F = mm.transition;
    const Eigen::MatrixXd& H = sm.measurement;
    const Eigen::MatrixXd& R = sm.noise;
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);

    std::vector<Eigen::VectorXd> m_pred(n), m_filt(n);
    std::vector<Eigen::MatrixXd> P_pred(n), P_filt(n);
    SmoothedSequence out;

    std::size_t next_meas = 0;
    while (next_meas < measurements.size() && measurements[next_meas].time < lifetime.birth) ++next_meas;
    for (std::size_t k = 0; k < n; ++k) {
        const Time t = lifetime.birth + static_cast<Time>(k);
        if (k == 0) {
            m_pred[0] = mm.birth_mean;
            P_pred[0] = mm.birth_covariance;
        } else {
            m_pred[k] = F * m_filt[k - 1];
            P_pred[k] = F * P_filt[k - 1] * F.transpose() + mm.process_noise;
        }
        m_filt[k] = m_pred[k];
        P_filt[k] = P_pred[k];
        if (next_meas < measurements.size() && measurements[next_meas].time == t) {
            const Eigen::VectorXd& z = measurements[next_meas].z;
            const Eigen::MatrixXd S = H * P_pred[k] * H.transpose() + R;
            const Eigen::LDLT<Eigen::MatrixXd> S_ldlt(S);
            const Eigen::MatrixXd K = S_ldlt.solve(H * P_pred[k]).transpose();
            const Eigen::VectorXd innov = z - H * m_pred[k];
            out.log_likelihood += -0.5 * (innov.dot(S_ldlt.solve(innov)) +
                                          S_ldlt.vectorD().array().log().sum() +
                                          static_cast<double>(z.size()) * std::log(2.0 * std::numbers::pi));
            m_filt[k] = m_pred[k] + K * innov;
            const Eigen::MatrixXd A = I - K * H;
            P_filt[k] = A * P_pred[k] * A.transpose() + K * R * K.transpose();
            P_filt[k] = 0.5 * (P_filt[k] + P_filt[k].transpose()).eval();
            ++next_meas;
        }
    }

    // Backward pass. gains[k] maps x_{k+1} onto x_k.
    std::vector<Eigen::VectorXd> m_s(n);
    std::vector<Eigen::MatrixXd> P_s(n), gains(n);
    m_s[n - 1] = m_filt[n - 1];
    P_s[n - 1] = P_filt[n - 1];
    for (std::size_t k = n - 1; k-- > 0;) {
        const Eigen::MatrixXd FP = F * P_filt[k];
        gains[k] = P_pred[k + 1].completeOrthogonalDecomposition().solve(FP).transpose();
        m_s[k] = m_filt[k] + gains[k] * (m_s[k + 1] - m_pred[k + 1]);
        P_s[k] = P_filt[k] + gains[k] * (P_s[k + 1] - P_pred[k + 1]) * gains[k].transpose();
        P_s[k] = 0.5 * (P_s[k] + P_s[k].transpose()).eval();
    }

    const auto N = static_cast<Eigen::Index>(n) * d;
    GaussianSequence& joint = out.joint;
    joint.state_dim = static_cast<std::size_t>(d);
    joint.mean.resize(N);
    joint.covariance.resize(N, N);
    for (std::size_t k = 0; k < n; ++k) {
        const auto ok = static_cast<Eigen::Index>(k) * d;
        joint.mean.segment(ok, d) = m_s[k];
        joint.covariance.block(ok, ok, d, d) = P_s[k];
    }
    // Cov(x_k, x_j) = G_k Cov(x_{k+1}, x_j) for j > k.
    for (std::size_t k = n - 1; k-- > 0;) {
        const auto ok = static_cast<Eigen::Index>(k) * d;
        for (std::size_t j = k + 1; j < n; ++j) {
            const auto oj = static_cast<Eigen::Index>(j) * d;
            const Eigen::MatrixXd c = gains[k] * joint.covariance.block(ok + d, oj, d, d);
            joint.covariance.block(ok, oj, d, d) = c;
            joint.covariance.block(oj, ok, d, d) = c.transpose();
        }
    }
    out.step_means = std::move(m_s);
    out.step_covariances = std::move(P_s);
    return out;
}

BernoulliTrajectory fit_bernoulli_track(std::span<const TimedMeasurement> measurements, const MotionModel& mm,
                                        const SensorModel& sm, const TimeWindow& window, double r0,
                                        const FitOptions& options) {
    if (measurements.empty()) throw std::invalid_argument("track fit needs at least one measurement");
    if (!is_probability(r0)) throw std::invalid_argument("prior existence probability outside [0,1]");
    require(check_motion(mm), "motion model");
    require(check_sensor(sm, mm.state_dim()), "sensor model");
    for (std::size_t i = 0; i < measurements.size(); ++i) {
        if (!window.contains(measurements[i].time)) throw std::invalid_argument("measurement time outside window");
        if (i > 0 && measurements[i].time <= measurements[i - 1].time) {
            throw std::invalid_argument("measurement times must be strictly increasing");
        }
        if (measurements[i].z.size() != sm.measurement.rows()) {
            throw std::invalid_argument("measurement has the wrong dimension");
        }
    }
    const Time first = measurements.front().time;
    const Time last = measurements.back().time;
    const auto slack = static_cast<Time>(options.slack);
    const Time birth_lo = std::max(window.alpha(), first - slack);
    // Without deaths the only possible death time is the end of the window.
    const Time death_lo = mm.survival >= 1.0 ? window.gamma() : last;
    const Time death_hi = mm.survival >= 1.0 ? window.gamma() : std::min(window.gamma(), last + slack);

    const double log_ps = std::log(mm.survival);
    const double log_die = std::log1p(-mm.survival);
    const double log_pd = std::log(sm.detection);
    const double log_miss = std::log1p(-sm.detection);
    const auto n_meas = static_cast<double>(measurements.size());

    std::vector<Lifetime> lifetimes;
    std::vector<double> log_w;
    std::vector<GaussianSequence> joints;
    for (Time b = birth_lo; b <= first; ++b) {
        for (Time e = death_lo; e <= death_hi; ++e) {
            const Lifetime lt{b, e};
            const auto len = static_cast<double>(lt.length());
            double lw = (len - 1.0) * log_ps + n_meas * log_pd;
            if (len > n_meas) lw += (len - n_meas) * log_miss;
            if (e < window.gamma()) lw += log_die;
            if (!(lw > -std::numeric_limits<double>::infinity())) continue;
            auto smoothed = smooth_lifetime(measurements, mm, sm, lt);
            lifetimes.push_back(lt);
            log_w.push_back(lw + smoothed.log_likelihood);
            joints.push_back(std::move(smoothed.joint));
        }
    }
    if (lifetimes.empty()) {
        throw std::invalid_argument("no lifetime hypothesis has positive prior probability");
    }
    const double max_lw = *std::max_element(log_w.begin(), log_w.end());
    double total = 0.0;
    for (double& w : log_w) {
        w = std::exp(w - max_lw);
        total += w;
    }
    BernoulliTrajectory out;
    out.r = r0;
    for (std::size_t i = 0; i < lifetimes.size(); ++i) {
        const double p = log_w[i] / total;
        if (p <= 0.0) continue;
        out.density.pmf.entries.push_back({lifetimes[i], p});
        out.density.conditionals.push_back(std::move(joints[i]));
    }
    // Renormalize after dropping underflowed hypotheses.
    double kept = 0.0;
    for (const auto& e : out.density.pmf.entries) kept += e.probability;
    for (auto& e : out.density.pmf.entries) e.probability /= kept;
    return out;
}

}  // namespace trajcon
