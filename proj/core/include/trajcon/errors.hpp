#pragma once

#include <stdexcept>
#include <string>

namespace trajcon {

/// No lifetime in the density's support overlaps any constraint time.
class ZeroSupportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Too many active constraints for disjunct partition enumeration.
class PartitionBudgetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Rejection sampling accepted too few proposals to be meaningful.
class AcceptanceRateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace trajcon
