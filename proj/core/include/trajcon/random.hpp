#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace trajcon {

using Rng = std::mt19937_64;

/// Mixes a base seed with stream identifiers into an independent seed.
/// Used wherever work is split (per lifetime pair, per component, per run) so
/// results never depend on evaluation order.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

/// Monte Carlo settings shared by every probability query.
struct McOptions {
    std::size_t budget = 100000;
    std::uint64_t seed = 0;
    /// Take closed-form shortcuts when the structure allows it.
    bool allow_exact = true;
};

/// A scalar estimate with its Monte Carlo standard error (0 for exact values).
struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

}  // namespace trajcon
