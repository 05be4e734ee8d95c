#pragma once

#include <stdexcept>
#include <string>

namespace rost {

/// Thrown by measure construction when the input violates a structural
/// invariant (mass != 1, overlapping pieces, non-increasing atoms, ...).
class MeasureError : public std::invalid_argument {
public:
    explicit MeasureError(const std::string& msg) : std::invalid_argument(msg) {}
};

/// No interval (-bhat_minus, bhat_plus) containing (-a_minus, a_plus) is
/// free of target mass: assumption D.1 cannot be fulfilled.
class NoGapError : public std::runtime_error {
public:
    explicit NoGapError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A solve was requested for an input pair that fails validation (D.1/D.2).
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// The continuation mask touched a lattice edge on a side whose boundary is
/// classified finite; the grid must be widened instead of biasing the solve.
class DomainTooNarrow : public std::runtime_error {
public:
    explicit DomainTooNarrow(const std::string& msg) : std::runtime_error(msg) {}
};

/// Two lattices that must share dx, dt and x-nodes do not.
class GridMismatch : public std::runtime_error {
public:
    explicit GridMismatch(const std::string& msg) : std::runtime_error(msg) {}
};

/// Boundary extraction found the mask at a lattice edge on a side the
/// support analysis classifies as finite.
class ClassificationConflict : public std::runtime_error {
public:
    explicit ClassificationConflict(const std::string& msg) : std::runtime_error(msg) {}
};

/// Tree oracle instances above the enumeration bound are rejected.
class DepthExceeded : public std::runtime_error {
public:
    explicit DepthExceeded(const std::string& msg) : std::runtime_error(msg) {}
};

/// A problem-spec document failed to parse.
class SpecParseError : public std::runtime_error {
public:
    explicit SpecParseError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace rost
