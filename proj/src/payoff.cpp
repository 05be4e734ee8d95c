#include "rost/payoff.hpp"

#include <algorithm>
#include <cmath>

#include "rost/errors.hpp"

namespace rost {

PayoffCurve PayoffCurve::build(const ProbabilityMeasure& nu, const ProbabilityMeasure& mu) {
    PayoffCurve P;
    std::vector<double>& b = P.breaks_;
    for (double x : nu.breakpoints()) b.push_back(x);
    for (double x : mu.breakpoints()) b.push_back(x);
    b.push_back(0.0);
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());

    const std::size_t m = b.size();
    P.coef_.assign(m > 1 ? m - 1 : 0, {0, 0, 0});

    // slope and curvature of G on each open interval
    std::vector<double> c1(m > 1 ? m - 1 : 0), c2(m > 1 ? m - 1 : 0);
    for (std::size_t j = 0; j + 1 < m; ++j) {
        const double xl = b[j], xr = b[j + 1];
        c1[j] = 2.0 * (nu.cdf(xl) - mu.cdf(xl));
        // d/dx (F_nu - F_mu) inside the interval from the CDF increment
        c2[j] = ((nu.cdf_left(xr) - nu.cdf(xl)) - (mu.cdf_left(xr) - mu.cdf(xl))) / (xr - xl);
    }
    // anchor G(0) = 0 and integrate outward in both directions
    const std::size_t j0 =
        std::size_t(std::lower_bound(b.begin(), b.end(), 0.0) - b.begin());  // b[j0] == 0
    std::vector<double> val(m, 0.0);
    for (std::size_t j = j0; j + 1 < m; ++j) {
        const double h = b[j + 1] - b[j];
        val[j + 1] = val[j] + c1[j] * h + c2[j] * h * h;
    }
    for (std::size_t j = j0; j-- > 0;) {
        const double h = b[j + 1] - b[j];
        val[j] = val[j + 1] - (c1[j] * h + c2[j] * h * h);
    }
    for (std::size_t j = 0; j + 1 < m; ++j) P.coef_[j] = {val[j], c1[j], c2[j]};
    P.g_minus_inf_ = val.front();
    P.g_plus_inf_ = val.back();

    // candidate extrema: breakpoints plus interior quadratic vertices
    std::vector<std::pair<double, double>> cand;  // (x, G(x))
    for (std::size_t j = 0; j < m; ++j) cand.emplace_back(b[j], val[j]);
    for (std::size_t j = 0; j + 1 < m; ++j) {
        if (c2[j] != 0.0) {
            const double xv = -c1[j] / (2.0 * c2[j]);
            if (xv > 0 && xv < b[j + 1] - b[j])
                cand.emplace_back(b[j] + xv, val[j] + c1[j] * xv + c2[j] * xv * xv);
        }
    }
    std::sort(cand.begin(), cand.end());
    double best = cand.front().second, best_x = cand.front().first, sup = 0.0;
    for (const auto& [x, v] : cand) {
        sup = std::max(sup, std::abs(v));
        if (v < best) {  // ties keep the leftmost minimizer
            best = v;
            best_x = x;
        }
    }
    P.argmin_ = best_x;
    P.sup_abs_ = sup;
    return P;
}

double PayoffCurve::operator()(double x) const {
    if (x <= breaks_.front()) return g_minus_inf_;
    if (x >= breaks_.back()) return g_plus_inf_;
    const std::size_t j =
        std::size_t(std::upper_bound(breaks_.begin(), breaks_.end(), x) - breaks_.begin()) - 1;
    const double t = x - breaks_[j];
    const auto& c = coef_[j];
    return c[0] + c[1] * t + c[2] * t * t;
}

double PayoffCurve::deriv_right(double x) const {
    if (x < breaks_.front() || x >= breaks_.back()) return 0.0;
    const std::size_t j =
        std::size_t(std::upper_bound(breaks_.begin(), breaks_.end(), x) - breaks_.begin()) - 1;
    const double t = x - breaks_[j];
    return coef_[j][1] + 2.0 * coef_[j][2] * t;
}

double PayoffCurve::deriv_left(double x) const {
    if (x <= breaks_.front() || x > breaks_.back()) return 0.0;
    // interval whose closure contains x from the left
    const std::size_t j =
        std::size_t(std::lower_bound(breaks_.begin(), breaks_.end(), x) - breaks_.begin()) - 1;
    const double t = x - breaks_[j];
    return coef_[j][1] + 2.0 * coef_[j][2] * t;
}

InfiniteHorizonResult infinite_horizon(const PayoffCurve& payoff, const SupportSummary& summary) {
    InfiniteHorizonResult r;
    const double gp = payoff.g_plus_inf(), gm = payoff.g_minus_inf();
    r.v = std::max(gp, gm);
    // compact supports keep both limits finite; the unbounded tag is kept for
    // completeness of the case split but cannot trigger here
    if (gm < gp) {
        r.case_tag = HorizonCase::right_dominant;
        r.c_inf_hi = Extended::finite(summary.mu_plus);
        r.c_inf_lo_abs = Extended::infinity();
    } else if (gp < gm) {
        r.case_tag = HorizonCase::left_dominant;
        r.c_inf_hi = Extended::infinity();
        r.c_inf_lo_abs = Extended::finite(summary.mu_minus);
    } else {
        r.case_tag = HorizonCase::balanced;
        r.c_inf_hi = Extended::finite(summary.mu_plus);
        r.c_inf_lo_abs = Extended::finite(summary.mu_minus);
    }
    return r;
}

}  // namespace rost
