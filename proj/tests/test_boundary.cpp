#include <doctest.h>

#include <cmath>

#include "rost/boundary.hpp"
#include "rost/errors.hpp"
#include "rost/rng.hpp"

using namespace rost;

namespace {

ProbabilityMeasure delta(double x) { return ProbabilityMeasure({{x, 1.0}}, {}); }
ProbabilityMeasure two_point() { return ProbabilityMeasure({{-1.0, 0.5}, {1.0, 0.5}}, {}); }
ProbabilityMeasure uniform(double lo, double hi) {
    return ProbabilityMeasure({}, {{lo, hi, 1.0 / (hi - lo)}});
}
ProbabilityMeasure three_atom() {
    return ProbabilityMeasure({{-1.0, 0.5}, {0.7, 0.25}, {1.5, 0.25}}, {});
}

LatticeParams params(double dx) {
    LatticeParams p;
    p.dx = dx;
    return p;
}

struct Fixture {
    Problem problem;
    ValueSurface surface;
    BoundarySet boundaries;
};

Fixture make(const ProbabilityMeasure& mu, double T, double dx) {
    Problem pr = prepare(delta(0.0), mu, T, params(dx));
    ValueSurface s = solve(pr);
    BoundarySet b = extract_boundaries(s, s.eps_stop());
    return {std::move(pr), std::move(s), std::move(b)};
}

}  // namespace

TEST_CASE("two-point boundaries sit at the atom level") {
    const double dx = 0.01;
    const Fixture f = make(two_point(), 1.0, dx);
    for (std::size_t k = 0; k < f.boundaries.n_rows(); ++k) {
        CHECK(std::abs(f.boundaries.b_plus[k].value() - 1.0) <= 2 * dx);
        CHECK(std::abs(f.boundaries.b_minus[k].value() - 1.0) <= 2 * dx);
    }
    // raw extraction is also tight outside the terminal layer
    for (std::size_t k = 0; k < f.boundaries.n_rows(); ++k) {
        if (f.boundaries.time(k) > 1.0 - 0.05) break;
        CHECK(std::abs(f.boundaries.raw_plus[k].value() - 1.0) <= 2 * dx);
    }
    CHECK(f.boundaries.max_isotonic_violation <= dx);
}

TEST_CASE("one-sided target: lower boundary is the infinity sentinel") {
    const Fixture f = make(uniform(1, 2), 0.5, 0.01);
    for (std::size_t k = 0; k < f.boundaries.n_rows(); ++k) {
        CHECK(f.boundaries.b_minus[k].is_infinite());
        CHECK(f.boundaries.b_plus[k].is_finite());
    }
}

TEST_CASE("terminal row matches bhat") {
    const double dx = 0.01;
    const Fixture f = make(two_point(), 1.0, dx);
    const std::size_t last = f.boundaries.n_rows() - 1;
    CHECK(std::abs(f.boundaries.b_plus[last].value() - 1.0) <= dx);
    const Fixture g = make(uniform(-1, 1), 0.5, 0.01);
    const std::size_t last2 = g.boundaries.n_rows() - 1;
    CHECK(std::abs(g.boundaries.b_plus[last2].value() - 0.0) <= dx);
}

TEST_CASE("boundaries are non-increasing in time") {
    for (const auto& mu : {two_point(), uniform(-1, 1), three_atom()}) {
        const Fixture f = make(mu, 1.0, 0.02);
        for (std::size_t k = 0; k + 1 < f.boundaries.n_rows(); ++k) {
            const auto& a = f.boundaries.b_plus[k];
            const auto& b = f.boundaries.b_plus[k + 1];
            if (a.is_finite() && b.is_finite()) CHECK(a.value() >= b.value());
        }
    }
}

TEST_CASE("flat boundary on a terminal window when the target charges bhat") {
    const double dx = 0.01;
    const Fixture f = make(two_point(), 1.0, dx);
    const double T = 1.0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < f.boundaries.n_rows(); ++k)
        if (f.boundaries.time(k) >= 0.8 * T &&
            std::abs(f.boundaries.b_plus[k].value() - 1.0) <= dx)
            ++count;
    CHECK(count * f.boundaries.dt >= 0.19 * T);  // positive-width window
}

TEST_CASE("reversal fixes the endpoints and round trips exactly") {
    const Fixture f = make(two_point(), 1.0, 0.02);
    const ReversedBarrier r = reverse(f.boundaries, 1.0);
    CHECK(r.s0_plus().value() == doctest::Approx(1.0));
    CHECK(r.s0_minus().value() == doctest::Approx(1.0));
    // monotone: b decreasing => s non-decreasing
    for (std::size_t j = 1; j < r.n_knots(); ++j)
        CHECK_FALSE(r.plus_knots()[j] < r.plus_knots()[j - 1]);
    const BoundarySet back = reverse_back(r);
    for (std::size_t k = 0; k < back.n_rows(); ++k) {
        CHECK(back.b_plus[k] == f.boundaries.b_plus[k]);
        CHECK(back.b_minus[k] == f.boundaries.b_minus[k]);
    }
}

TEST_CASE("generalized inverse characterizes membership") {
    const Fixture f = make(uniform(-1, 1), 1.0, 0.01);
    const ReversedBarrier r = reverse(f.boundaries, 1.0);
    const InverseBarrier inv(r);
    SUBCASE("inside the initial gap phi vanishes") {
        const Fixture g = make(two_point(), 1.0, 0.02);
        const ReversedBarrier r2 = reverse(g.boundaries, 1.0);
        const InverseBarrier inv2(r2);
        CHECK(inv2.phi(0.0).value() == 0.0);
        CHECK(inv2.phi(0.9).value() == 0.0);
        CHECK(inv2.phi(1.5).is_infinite());  // level never exceeded
    }
    SUBCASE("phi is non-decreasing in |x| on the upper side") {
        Extended prev = Extended::finite(0.0);
        for (double x = 0.0; x <= 0.9; x += 0.01) {
            const Extended p = inv.phi(x);
            CHECK_FALSE(p < prev);
            prev = p;
        }
    }
    SUBCASE("duality phi(x) < t iff inside at knots") {
        Rng rng(5, 0);
        for (int i = 0; i < 1000; ++i) {
            const double x = 2.4 * rng.uniform() - 1.2;
            const std::size_t j = 1 + rng.next_u64() % r.n_knots();
            const double t = double(j) * r.dt();
            const Extended p = inv.phi(x);
            const bool member = inv.inside(t, x);
            const bool phi_lt = p.is_finite() && p.value() < t;
            CHECK(member == phi_lt);
        }
    }
    SUBCASE("t_star complements phi at the fixed horizon") {
        for (double x : {0.1, 0.4, 0.8}) {
            const Extended p = inv.phi(x);
            const Extended ts = inv.t_star(x, 1.0);
            if (p.is_finite() && p.value() < 1.0)
                CHECK(ts.value() == doctest::Approx(1.0 - p.value()));
        }
    }
}

TEST_CASE("flat detector finds atoms and ignores quantization walks") {
    SUBCASE("two-point: flat at 1 covering everything") {
        const Fixture f = make(two_point(), 1.0, 0.01);
        const auto flats = detect_flats(reverse(f.boundaries, 1.0), 0.03, 0.1);
        bool upper = false, lower = false;
        for (const auto& fl : flats) {
            if (fl.side == '+' && std::abs(fl.level - 1.0) <= 0.02 && fl.t_end >= 0.99)
                upper = true;
            if (fl.side == '-' && std::abs(fl.level + 1.0) <= 0.02) lower = true;
        }
        CHECK(upper);
        CHECK(lower);
    }
    SUBCASE("uniform target: no flats of width 0.1 despite slow saturation") {
        const double dx = 0.005;
        const Fixture f = make(uniform(-1, 1), 2.0, dx);
        const auto flats = detect_flats(reverse(f.boundaries, 2.0), 3 * dx, 0.1);
        CHECK(flats.empty());
    }
    SUBCASE("interior atom of the target shows up as a flat at its level") {
        const double dx = 0.01;
        const Fixture f = make(three_atom(), 2.0, dx);
        const auto flats = detect_flats(reverse(f.boundaries, 2.0), 2 * dx, 0.05);
        bool at07 = false;
        for (const auto& fl : flats)
            if (fl.side == '+' && std::abs(fl.level - 0.7) <= 2 * dx) at07 = true;
        CHECK(at07);
    }
}

TEST_CASE("jump detector crosses exactly the target gaps") {
    const double dx = 0.01;
    const Fixture f = make(three_atom(), 2.0, dx);
    const ReversedBarrier r = reverse(f.boundaries, 2.0);
    const auto jumps = detect_jumps(r, 5 * dx, f.problem.mu);
    bool found = false;
    for (const auto& j : jumps) {
        if (j.side != '+' || j.to_infinity) continue;
        if (std::abs(j.level_before - 0.7) <= 2 * dx &&
            std::abs(j.level_after - 1.5) <= 2 * dx) {
            found = true;
            CHECK(j.gap_mu_mass == 0.0);
        }
    }
    CHECK(found);
    // uniform fixture: no jumps above 5 dx
    const Fixture g = make(uniform(-1, 1), 2.0, 0.005);
    CHECK(detect_jumps(reverse(g.boundaries, 2.0), 5 * 0.005, g.problem.mu).empty());
    // two-point: s is constant, nothing to report
    const Fixture h = make(two_point(), 1.0, 0.02);
    CHECK(detect_jumps(reverse(h.boundaries, 1.0), 5 * 0.02, h.problem.mu).empty());
}

TEST_CASE("boundary start value grows toward the infinite-horizon endpoint") {
    double prev = 0.0;
    for (double T : {1.0, 2.0, 4.0}) {
        const Fixture f = make(uniform(-1, 1), T, 0.02);
        const double b0 = f.boundaries.b_plus[0].value();
        CHECK(b0 >= prev);
        prev = b0;
    }
    CHECK(prev >= 1.0 - 0.1);  // T = 4 already close at this dx
}

TEST_CASE("mismatched eps_stop is rejected") {
    const Fixture f = make(two_point(), 0.5, 0.05);
    CHECK_THROWS_AS(extract_boundaries(f.surface, f.surface.eps_stop() * 2),
                    std::invalid_argument);
}
