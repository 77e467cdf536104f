#pragma once

/// @file scenario.hpp
/// Standard point-target simulation (PPP birth, survival, linear-Gaussian
/// motion, detection with clutter) and construction of Bernoulli trajectory
/// densities from an already associated measurement sequence.

#include "trajcon/gaussian_sequence.hpp"
#include "trajcon/rfs.hpp"
#include "trajcon/trajectory.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace trajcon {

/// A birth that always happens at `time`; the state is drawn from the birth
/// Gaussian unless given.
struct ScheduledBirth {
    Time time = 0;
    std::optional<Eigen::VectorXd> state;
};

struct MotionModel {
    Eigen::MatrixXd transition;     // F
    Eigen::MatrixXd process_noise;  // Q
    double survival = 1.0;          // P^S
    double birth_rate = 0.0;        // expected Poisson births per step
    Eigen::VectorXd birth_mean;
    Eigen::MatrixXd birth_covariance;
    std::vector<ScheduledBirth> scheduled_births;

    std::size_t state_dim() const { return static_cast<std::size_t>(transition.rows()); }
};

struct SensorModel {
    Eigen::MatrixXd measurement;  // H
    Eigen::MatrixXd noise;        // R
    double detection = 1.0;       // P^D
    double clutter_rate = 0.0;    // expected clutter measurements per step
    /// Clutter is uniform on this box; every dimension must be bounded on both
    /// sides when clutter_rate > 0.
    std::optional<Box> clutter_region;

    std::size_t measurement_dim() const { return static_cast<std::size_t>(measurement.rows()); }
};

std::vector<std::string> check_motion(const MotionModel& mm);
std::vector<std::string> check_sensor(const SensorModel& sm, std::size_t state_dim);

struct Measurement {
    Eigen::VectorXd z;
    /// Index into the scenario truth when the measurement is target-generated.
    std::optional<std::size_t> truth_index;
};

struct MeasurementScan {
    Time time = 0;
    std::vector<Measurement> measurements;
};

struct Scenario {
    TimeWindow window;
    std::vector<Trajectory> truth;
    std::vector<MeasurementScan> scans;
};

std::vector<Trajectory> simulate_truth(const MotionModel& mm, const TimeWindow& window, std::uint64_t seed);

/// One scan per time step of the window.
std::vector<MeasurementScan> simulate_measurements(std::span<const Trajectory> truth, const SensorModel& sm,
                                                   const TimeWindow& window, std::uint64_t seed);

/// Truth from derive_seed(seed, 1), measurements from derive_seed(seed, 2).
Scenario simulate_scenario(const MotionModel& mm, const SensorModel& sm, const TimeWindow& window,
                           std::uint64_t seed);

struct TimedMeasurement {
    Time time = 0;
    Eigen::VectorXd z;
};

/// Measurements tagged with the given truth index, in time order.
std::vector<TimedMeasurement> associated_measurements(const Scenario& scenario, std::size_t truth_index);

/// Forward Kalman filter plus Rauch-Tung-Striebel smoother over one lifetime,
/// returning the joint smoothed Gaussian of the whole state sequence.
struct SmoothedSequence {
    GaussianSequence joint;
    std::vector<Eigen::VectorXd> step_means;
    std::vector<Eigen::MatrixXd> step_covariances;
    /// log p(measurements | lifetime), Gaussian part only.
    double log_likelihood = 0.0;
};

SmoothedSequence smooth_lifetime(std::span<const TimedMeasurement> measurements, const MotionModel& mm,
                                 const SensorModel& sm, const Lifetime& lifetime);

struct FitOptions {
    /// Births considered up to `slack` steps before the first measurement,
    /// deaths up to `slack` steps after the last.
    std::size_t slack = 3;
};

/// Bernoulli density for one associated track. Each candidate lifetime is
/// weighted by its measurement likelihood times survival and detection
/// priors; r is the supplied prior r0.
BernoulliTrajectory fit_bernoulli_track(std::span<const TimedMeasurement> measurements, const MotionModel& mm,
                                        const SensorModel& sm, const TimeWindow& window, double r0,
                                        const FitOptions& options = {});

}  // namespace trajcon
