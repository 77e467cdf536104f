#pragma once

/// @file io.hpp
/// JSON encoding of densities, constraint sets, scenarios, models and oracle
/// reports. Doubles are written with full precision so values round-trip
/// exactly. Matrices are arrays of rows; an interval is [lower, upper] with
/// null for an unbounded end. Decoding errors carry the JSON pointer of the
/// offending value.

#include "trajcon/gaussian_sequence.hpp"
#include "trajcon/oracle.hpp"
#include "trajcon/rfs.hpp"
#include "trajcon/scenario.hpp"
#include "trajcon/trajectory.hpp"

#include <nlohmann/json.hpp>

#include <stdexcept>
#include <string>

namespace trajcon {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

class SchemaError : public std::invalid_argument {
public:
    SchemaError(std::string pointer, const std::string& message)
        : std::invalid_argument(pointer.empty() ? "/: " + message : pointer + ": " + message),
          pointer_(std::move(pointer)) {}

    const std::string& pointer() const { return pointer_; }

private:
    std::string pointer_;
};

/// Every decoder takes the JSON pointer of its input so nested errors
/// report full paths.
Json box_to_json(const Box& box);
Box box_from_json(const Json& j, const std::string& pointer = "");

Json region_to_json(const StateRegion& region);
StateRegion region_from_json(const Json& j, const std::string& pointer = "");

Json constraint_set_to_json(const ConstraintSet& cs);
ConstraintSet constraint_set_from_json(const Json& j, const std::string& pointer = "");

Json gaussian_to_json(const GaussianSequence& gs);
GaussianSequence gaussian_from_json(const Json& j, const std::string& pointer = "");

Json density_to_json(const TrajectoryDensity& td);
TrajectoryDensity density_from_json(const Json& j, const std::string& pointer = "");

Json bernoulli_to_json(const BernoulliTrajectory& b);
BernoulliTrajectory bernoulli_from_json(const Json& j, const std::string& pointer = "");

Json ppp_to_json(const PppTrajectory& p);
PppTrajectory ppp_from_json(const Json& j, const std::string& pointer = "");

/// Top level carries "schema": "trajcon.pmbm" and "version".
Json pmbm_to_json(const PmbmDensity& m);
PmbmDensity pmbm_from_json(const Json& j, const std::string& pointer = "");

Json trajectory_to_json(const Trajectory& t);
Trajectory trajectory_from_json(const Json& j, const std::string& pointer = "");

/// Top level carries "schema": "trajcon.scenario" and "version".
Json scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const Json& j, const std::string& pointer = "");

Json motion_to_json(const MotionModel& mm);
MotionModel motion_from_json(const Json& j, const std::string& pointer = "");

Json sensor_to_json(const SensorModel& sm);
SensorModel sensor_from_json(const Json& j, const std::string& pointer = "");

Json report_to_json(const ConstraintReport& r);
Json oracle_report_to_json(const OracleReport& r);

Json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const Json& j, const std::string& pointer = "");
Json vector_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const Json& j, const std::string& pointer = "");

/// Typed field access with pointer-qualified errors.
const Json& require_field(const Json& j, const std::string& key, const std::string& pointer);
double number_from_json(const Json& j, const std::string& pointer);
std::int64_t integer_from_json(const Json& j, const std::string& pointer);
bool bool_from_json(const Json& j, const std::string& pointer);
std::string string_from_json(const Json& j, const std::string& pointer);
double probability_from_json(const Json& j, const std::string& pointer);

}  // namespace trajcon
