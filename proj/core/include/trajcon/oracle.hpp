#pragma once

/// @file oracle.hpp
/// Brute-force checks of constrained Bernoulli / PPP / PMBM parameters:
/// sample the unconstrained object, filter with tau, and compare what
/// survives against the constrained object with z-score tolerances.
///
/// Only sampling and the trajectory-level constraint filter are used on the
/// empirical side.

#include "trajcon/random.hpp"
#include "trajcon/rfs.hpp"
#include "trajcon/trajectory.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace trajcon {

struct OracleOptions {
    /// Draws (Bernoulli / PMBM) or runs (PPP); at least 1000.
    std::size_t n = 200000;
    double z_threshold = 4.0;
    std::uint64_t seed = 0;
    /// Used to constrain the input and to estimate constrained moments.
    McOptions engine{};
    /// Also compare per-step means and variances of the survivors.
    bool check_moments = true;
    /// Moment checks need at least this many samples on both sides.
    std::size_t min_moment_samples = 200;
    /// Pair-frequency checks need at least this expected count.
    double min_expected_count = 10.0;
};

struct OracleEntry {
    std::string name;
    /// existence, intensity, pair, mean, variance, dispersion, correlation,
    /// cardinality
    std::string kind;
    double analytic = 0.0;
    double empirical = 0.0;
    double std_error = 0.0;
    double z = 0.0;
    bool tested = true;
    bool passed = true;
};

struct OracleReport {
    std::string subject;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    double z_threshold = 4.0;
    std::vector<OracleEntry> entries;

    bool passed() const;
    std::size_t failures() const;
    /// Failures restricted to one entry kind.
    std::size_t failures(const std::string& kind) const;
};

/// Constrains `b` with options.engine, then compares.
OracleReport oracle_bernoulli(const BernoulliTrajectory& b, const ConstraintSet& cs, const OracleOptions& options);
/// Compares a given constrained Bernoulli against samples of `b`.
OracleReport oracle_bernoulli(const BernoulliTrajectory& b, const BernoulliTrajectory& constrained,
                              const ConstraintSet& cs, const OracleOptions& options);

OracleReport oracle_ppp(const PppTrajectory& p, const ConstraintSet& cs, const OracleOptions& options);
OracleReport oracle_ppp(const PppTrajectory& p, const PppTrajectory& constrained, const ConstraintSet& cs,
                        const OracleOptions& options);

/// PPP with seed derive_seed(seed, 0), track i of hypothesis a with
/// derive_seed(seed, a + 1, i), then a whole-set cardinality check with
/// derive_seed(seed, 0, 1).
OracleReport oracle_pmbm(const PmbmDensity& m, const ConstraintSet& cs, const OracleOptions& options);
OracleReport oracle_pmbm(const PmbmDensity& m, const PmbmDensity& constrained, const ConstraintSet& cs,
                         const OracleOptions& options);

/// Fixed-width text table, one row per entry.
std::string format_table(const OracleReport& report);

}  // namespace trajcon
