#include <doctest.h>

#include <cmath>

#include "rost/payoff.hpp"
#include "rost/rng.hpp"

using namespace rost;

namespace {

ProbabilityMeasure delta(double x) { return ProbabilityMeasure({{x, 1.0}}, {}); }
ProbabilityMeasure two_point() { return ProbabilityMeasure({{-1.0, 0.5}, {1.0, 0.5}}, {}); }
ProbabilityMeasure uniform(double lo, double hi) {
    return ProbabilityMeasure({}, {{lo, hi, 1.0 / (hi - lo)}});
}

// independent oracle: Simpson quadrature of 2(F_nu - F_mu)
double g_quadrature(const ProbabilityMeasure& nu, const ProbabilityMeasure& mu, double x) {
    const int n = 20000;
    const double h = x / n;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double z = i * h;
        const double f = 2.0 * (nu.cdf(z) - mu.cdf(z));
        acc += f * ((i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0));
    }
    return acc * h / 3.0;
}

}  // namespace

TEST_CASE("two-point obstacle is min(|x|, 1)") {
    const auto G = PayoffCurve::build(delta(0.0), two_point());
    CHECK(G(0.0) == 0.0);
    CHECK(G(0.5) == doctest::Approx(0.5));
    CHECK(G(2.0) == doctest::Approx(1.0));
    CHECK(G(-2.0) == doctest::Approx(1.0));
    CHECK(G.g_plus_inf() == doctest::Approx(1.0));
    CHECK(G.g_minus_inf() == doctest::Approx(1.0));
}

TEST_CASE("non-connected example reproduces the published values") {
    const auto nu = ProbabilityMeasure({{-1.0, 0.5}, {1.0, 0.5}}, {});
    const auto G = PayoffCurve::build(nu, uniform(-0.5, 0.5));
    CHECK(G(2.0) == doctest::Approx(-0.75).epsilon(1e-12));
    CHECK(G(-2.0) == doctest::Approx(-0.75).epsilon(1e-12));
    CHECK(G(0.0) == 0.0);
    // maximum value is G(0) = 0
    for (double x = -3; x <= 3; x += 0.01) CHECK(G(x) <= 1e-12);
}

TEST_CASE("identical measures give the zero obstacle") {
    const auto G = PayoffCurve::build(two_point(), two_point());
    for (double x = -3; x <= 3; x += 0.1) CHECK(G(x) == doctest::Approx(0.0));
}

TEST_CASE("one-sided derivatives match the CDF difference") {
    const auto nu = delta(0.0);
    const auto mu = two_point();
    const auto G = PayoffCurve::build(nu, mu);
    CHECK(G.deriv_right(0.0) == doctest::Approx(1.0));
    CHECK(G.deriv_left(0.0) == doctest::Approx(-1.0));
    CHECK(G.deriv_right(0.5) == doctest::Approx(1.0));
    CHECK(G.deriv_left(0.5) == doctest::Approx(1.0));
    CHECK(G.deriv_right(-5.0) == 0.0);
    CHECK(G.deriv_left(-5.0) == 0.0);
    // bounds |G'| <= 2 and exact identity at many points
    for (double x = -2; x <= 2; x += 0.0313) {
        CHECK(std::abs(G.deriv_right(x)) <= 2.0);
        CHECK(G.deriv_right(x) ==
              doctest::Approx(2.0 * (nu.cdf(x) - mu.cdf(x))).epsilon(1e-12));
        CHECK(G.deriv_left(x) ==
              doctest::Approx(2.0 * (nu.cdf_left(x) - mu.cdf_left(x))).epsilon(1e-12));
    }
}

TEST_CASE("payoff agrees with quadrature on a mixed fixture") {
    const auto nu = ProbabilityMeasure({{-0.25, 0.5}}, {{0.0, 0.5, 1.0}});
    const auto mu = ProbabilityMeasure({{-1.5, 0.25}, {2.0, 0.25}}, {{1.0, 1.5, 1.0}});
    const auto G = PayoffCurve::build(nu, mu);
    // quadrature error across CDF jumps is O(h * atom mass) ~ 1e-4
    for (double x : {-2.0, -1.2, -0.3, 0.1, 0.4, 0.9, 1.2, 1.7, 2.5})
        CHECK(std::abs(G(x) - g_quadrature(nu, mu, x)) < 1e-4);
}

TEST_CASE("finite differences of G match the derivatives away from breakpoints") {
    const auto nu = ProbabilityMeasure({}, {{-0.5, 0.5, 1.0}});
    const auto mu = ProbabilityMeasure({}, {{-2.0, -1.0, 0.3}, {1.0, 2.0, 0.7}});
    const auto G = PayoffCurve::build(nu, mu);
    const double h = 1e-5;
    for (double x : {-1.7, -0.8, -0.2, 0.3, 0.8, 1.4}) {
        const double fd = (G(x + h) - G(x - h)) / (2 * h);
        CHECK(fd == doctest::Approx(G.deriv_right(x)).epsilon(1e-6));
    }
}

TEST_CASE("sup G equals the larger limit and G is Lipschitz with constant 2") {
    const auto G = PayoffCurve::build(delta(0.0), two_point());
    double sup = -1e300;
    for (double x = -4; x <= 4; x += 0.001) sup = std::max(sup, G(x));
    CHECK(sup <= std::max(G.g_plus_inf(), G.g_minus_inf()) + 1e-12);
    Rng rng(7, 0);
    for (int i = 0; i < 2000; ++i) {
        const double x = 8 * rng.uniform() - 4, y = 8 * rng.uniform() - 4;
        CHECK(std::abs(G(x) - G(y)) <= 2.0 * std::abs(x - y) + 1e-12);
    }
}

TEST_CASE("G is affine exactly where both CDFs are constant") {
    const auto G = PayoffCurve::build(delta(0.0), two_point());
    // on (0, 1) both CDFs are constant, so three-point curvature vanishes
    for (double x = 0.1; x <= 0.9; x += 0.1)
        CHECK(G(x + 0.05) - 2 * G(x) + G(x - 0.05) == doctest::Approx(0.0));
}

TEST_CASE("argmin lies between the supports and ties break leftward") {
    const auto G = PayoffCurve::build(delta(0.0), two_point());
    CHECK(G.argmin() == 0.0);
    const auto mu = ProbabilityMeasure({{-2.0, 0.5}, {2.0, 0.5}}, {});
    const auto nu = ProbabilityMeasure({}, {{-1.0, 1.0, 0.5}});
    const auto G2 = PayoffCurve::build(nu, mu);
    CHECK(G2.argmin() >= -1.0);
    CHECK(G2.argmin() <= 1.0);
}

TEST_CASE("infinite horizon cases") {
    SUBCASE("balanced two-point") {
        const auto nu = delta(0.0);
        const auto mu = two_point();
        const auto r = infinite_horizon(PayoffCurve::build(nu, mu), support_summary(nu, mu));
        CHECK(r.case_tag == HorizonCase::balanced);
        CHECK(r.v == doctest::Approx(1.0));
        CHECK(r.c_inf_hi.value() == doctest::Approx(1.0));
        CHECK(r.c_inf_lo_abs.value() == doctest::Approx(1.0));
    }
    SUBCASE("balanced uniform") {
        const auto nu = delta(0.0);
        const auto mu = uniform(-1, 1);
        const auto r = infinite_horizon(PayoffCurve::build(nu, mu), support_summary(nu, mu));
        CHECK(r.v == doctest::Approx(0.5));
        CHECK(r.c_inf_hi.value() == doctest::Approx(1.0));
    }
    SUBCASE("right dominant one-sided target") {
        const auto nu = delta(0.0);
        const auto mu = uniform(1, 2);
        const auto r = infinite_horizon(PayoffCurve::build(nu, mu), support_summary(nu, mu));
        CHECK(r.case_tag == HorizonCase::right_dominant);
        CHECK(r.c_inf_hi.value() == doctest::Approx(2.0));
        CHECK(r.c_inf_lo_abs.is_infinite());
        // supp mu inside the closed continuation interval
        CHECK(mu.support_max() <= r.c_inf_hi.value() + 1e-12);
    }
}
