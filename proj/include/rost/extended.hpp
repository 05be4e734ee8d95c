#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace rost {

/// Nonnegative real extended with a dedicated +infinity sentinel.
///
/// Barrier levels and support endpoints may be genuinely infinite. The
/// sentinel never enters float arithmetic; every comparison against it is
/// explicit, so an accidental `inf * 0` style NaN cannot occur.
class Extended {
public:
    Extended() : value_(0.0), inf_(false) {}

    static Extended finite(double v) {
        Extended e;
        e.value_ = v;
        e.inf_ = false;
        return e;
    }
    static Extended infinity() {
        Extended e;
        e.inf_ = true;
        return e;
    }

    bool is_finite() const { return !inf_; }
    bool is_infinite() const { return inf_; }

    double value() const {
        if (inf_) throw std::logic_error("Extended: value() on infinity sentinel");
        return value_;
    }

    /// Finite value, or `fallback` for the sentinel (for reporting only).
    double value_or(double fallback) const { return inf_ ? fallback : value_; }

    /// level > x, treating the sentinel as larger than every real.
    bool exceeds(double x) const { return inf_ || value_ > x; }
    /// level >= x
    bool at_least(double x) const { return inf_ || value_ >= x; }

    bool operator==(const Extended& o) const {
        if (inf_ || o.inf_) return inf_ == o.inf_;
        return value_ == o.value_;
    }
    bool operator!=(const Extended& o) const { return !(*this == o); }

    /// Total order with infinity last.
    bool operator<(const Extended& o) const {
        if (inf_) return false;
        if (o.inf_) return true;
        return value_ < o.value_;
    }

    std::string str() const { return inf_ ? "inf" : std::to_string(value_); }

private:
    double value_;
    bool inf_;
};

inline Extended max(const Extended& a, const Extended& b) { return a < b ? b : a; }

}  // namespace rost
