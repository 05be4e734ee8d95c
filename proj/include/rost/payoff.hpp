#pragma once

#include <array>
#include <vector>

#include "rost/extended.hpp"
#include "rost/measure.hpp"

namespace rost {

/// The obstacle G(x) = 2 * int_0^x (F_nu - F_mu) dz in exact closed form.
///
/// Both CDFs are piecewise linear, so G is piecewise quadratic with
/// breakpoints at the union of both measures' breakpoints plus 0. Beyond the
/// outermost breakpoints both CDFs agree (0 or 1) and G is constant, which
/// pins the limits G(+-inf) exactly.
///
/// Immutable; evaluation anywhere costs one binary search.
class PayoffCurve {
public:
    static PayoffCurve build(const ProbabilityMeasure& nu, const ProbabilityMeasure& mu);

    double operator()(double x) const;

    /// One-sided derivatives 2(F_nu - F_mu)(x) and 2(F_nu - F_mu)(x-).
    double deriv_right(double x) const;
    double deriv_left(double x) const;

    double g_plus_inf() const { return g_plus_inf_; }
    double g_minus_inf() const { return g_minus_inf_; }

    /// Leftmost global minimizer.
    double argmin() const { return argmin_; }

    /// sup_x |G(x)| (exact over the piecewise representation).
    double sup_abs() const { return sup_abs_; }

    const std::vector<double>& breakpoints() const { return breaks_; }

private:
    PayoffCurve() = default;

    std::vector<double> breaks_;
    // per interval [breaks_[j], breaks_[j+1]]: G = c0 + c1*(x-b_j) + c2*(x-b_j)^2
    std::vector<std::array<double, 3>> coef_;
    double g_plus_inf_ = 0, g_minus_inf_ = 0;
    double argmin_ = 0;
    double sup_abs_ = 0;
};

enum class HorizonCase { unbounded, right_dominant, left_dominant, balanced };

/// Infinite-horizon value and continuation interval (-b_inf-, b_inf+).
struct InfiniteHorizonResult {
    double v = 0;
    Extended c_inf_hi;        // b_inf+ ; sentinel = half line
    Extended c_inf_lo_abs;    // b_inf- as a magnitude; interval lower end is -value
    HorizonCase case_tag = HorizonCase::balanced;
};

InfiniteHorizonResult infinite_horizon(const PayoffCurve& payoff, const SupportSummary& summary);

}  // namespace rost
