#include <doctest.h>

#include <cmath>

#include "rost/embed.hpp"
#include "rost/errors.hpp"

using namespace rost;

namespace {

ProbabilityMeasure delta(double x) { return ProbabilityMeasure({{x, 1.0}}, {}); }
ProbabilityMeasure two_point() { return ProbabilityMeasure({{-1.0, 0.5}, {1.0, 0.5}}, {}); }
ProbabilityMeasure uniform(double lo, double hi) {
    return ProbabilityMeasure({}, {{lo, hi, 1.0 / (hi - lo)}});
}

struct Fixture {
    Problem problem;
    ValueSurface surface;
    BoundarySet boundaries;
    ReversedBarrier barrier;
};

Fixture make(const ProbabilityMeasure& mu, double T, double dx,
             std::vector<double> store_times = {}) {
    LatticeParams p;
    p.dx = dx;
    Problem pr = prepare(delta(0.0), mu, T, p);
    SolveConfig c;
    c.store_times = std::move(store_times);
    ValueSurface s = solve(pr, c);
    BoundarySet b = extract_boundaries(s, s.eps_stop());
    ReversedBarrier r = reverse(b, T);
    return {std::move(pr), std::move(s), std::move(b), std::move(r)};
}

ReversedBarrier constant_barrier(double level, double dt, double T) {
    const std::size_t n = std::size_t(std::llround(T / dt));
    std::vector<Extended> sp(n, Extended::finite(level)), sm(n, Extended::finite(level));
    return ReversedBarrier(std::move(sp), std::move(sm), Extended::finite(level),
                           Extended::finite(level), dt, 0.01, T);
}

}  // namespace

TEST_CASE("initial sampling inverts the source CDF") {
    CHECK(sample_initial(delta(0.0), 0.77) == 0.0);
    CHECK(sample_initial(uniform(-1, 1), 0.25) == doctest::Approx(-0.5));
    CHECK(sample_initial(two_point(), 0.3) == -1.0);
    CHECK(sample_initial(two_point(), 0.7) == 1.0);
}

TEST_CASE("paths from the two-point fixture exit at the atom levels") {
    const Fixture f = make(two_point(), 1.0, 0.02);
    PathConfig cfg;
    cfg.dt_sim = 2e-3;
    cfg.t_max = 8.0;
    cfg.seed = 11;
    int exits = 0;
    for (std::uint64_t i = 0; i < 200; ++i) {
        const PathResult r = simulate_sigma_star(f.barrier, 0.0, cfg, i);
        if (r.absorbed) {
            ++exits;
            CHECK(std::abs(std::abs(r.w) - 1.0) <= 2 * 0.02);
            CHECK(r.sigma > 0.0);
        }
    }
    CHECK(exits >= 195);
}

TEST_CASE("starts outside the time-zero barrier exit immediately at their position") {
    const Fixture f = make(two_point(), 1.0, 0.02);
    PathConfig cfg;
    const PathResult r = simulate_sigma_star(f.barrier, 5.0, cfg, 0);
    CHECK(r.absorbed);
    CHECK(r.sigma == 0.0);
    CHECK(r.w == 5.0);
}

TEST_CASE("a barrier with both sides infinite at a knot is rejected") {
    std::vector<Extended> sp{Extended::infinity()}, sm{Extended::infinity()};
    CHECK_THROWS_AS(ReversedBarrier(std::move(sp), std::move(sm), Extended::infinity(),
                                    Extended::infinity(), 0.1, 0.01, 0.1),
                    std::invalid_argument);
}

TEST_CASE("two-point embedding matches the atom masses") {
    const Fixture f = make(two_point(), 1.0, 0.02);
    PathConfig cfg;
    cfg.n_paths = 20000;
    cfg.dt_sim = 2e-3;
    cfg.t_max = 10.0;
    cfg.seed = 2024;
    const EmbeddingReport rep = verify_embedding(f.barrier, delta(0.0), two_point(), cfg);
    CHECK(rep.absorbed_fraction >= 0.99);
    CHECK(std::abs(rep.atom_frequencies.at(-1.0) - 0.5) <= 0.02);
    CHECK(std::abs(rep.atom_frequencies.at(1.0) - 0.5) <= 0.02);
    CHECK(rep.ks_distance <= 0.05);
    CHECK(rep.sigma_quantiles[0] < rep.sigma_quantiles[4]);
}

TEST_CASE("reports are identical regardless of worker count") {
    const Fixture f = make(two_point(), 1.0, 0.05);
    PathConfig cfg;
    cfg.n_paths = 4000;
    cfg.dt_sim = 2.5e-3;
    cfg.t_max = 4.0;
    cfg.seed = 99;
    cfg.n_threads = 1;
    const EmbeddingReport a = verify_embedding(f.barrier, delta(0.0), two_point(), cfg);
    cfg.n_threads = 4;
    const EmbeddingReport b = verify_embedding(f.barrier, delta(0.0), two_point(), cfg);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) CHECK(a.samples[i] == b.samples[i]);
    CHECK(a.ks_distance == b.ks_distance);
    CHECK(a.absorbed_fraction == b.absorbed_fraction);
}

TEST_CASE("a deliberately wrong barrier is far from the target law") {
    const ReversedBarrier wrong = constant_barrier(0.5, 1e-3, 1.0);
    PathConfig cfg;
    cfg.n_paths = 5000;
    cfg.dt_sim = 1e-3;
    cfg.t_max = 6.0;
    cfg.seed = 5;
    const EmbeddingReport rep = verify_embedding(wrong, delta(0.0), two_point(), cfg);
    CHECK(rep.ks_distance >= 0.4);
}

TEST_CASE("bridge correction only adds absorptions") {
    const Fixture f = make(uniform(-1, 1), 1.0, 0.02);
    PathConfig cfg;
    cfg.n_paths = 10000;
    cfg.dt_sim = 2e-3;
    cfg.t_max = 4.0;
    cfg.seed = 31;
    const EmbeddingReport off = verify_embedding(f.barrier, delta(0.0), uniform(-1, 1), cfg);
    cfg.bridge_correction = true;
    const EmbeddingReport on = verify_embedding(f.barrier, delta(0.0), uniform(-1, 1), cfg);
    CHECK(on.absorbed_fraction >= off.absorbed_fraction - 0.01);
    // discrete-time exits systematically lag; the correction shortens them
    CHECK(on.sigma_quantiles[2] <= off.sigma_quantiles[2] + 1e-12);
}

TEST_CASE("killed density: no time to exit keeps all mass") {
    const Fixture f = make(two_point(), 1.0, 0.02);
    ForwardDomain dom(f.boundaries);
    PathConfig cfg;
    cfg.n_paths = 2000;
    cfg.dt_sim = 1e-4;
    cfg.seed = 7;
    const KilledDensityEstimate e =
        killed_density_mc(dom, 0.2, 0.0, 0.2 + 10 * cfg.dt_sim, {-2.0, 2.0}, cfg);
    CHECK(e.survivor_mass >= 0.999);
}

TEST_CASE("killed density: starts on the boundary die almost surely") {
    const Fixture f = make(two_point(), 1.0, 0.01);
    ForwardDomain dom(f.boundaries);
    PathConfig cfg;
    cfg.n_paths = 4000;
    cfg.dt_sim = 1e-4;
    cfg.seed = 13;
    const KilledDensityEstimate e = killed_density_mc(dom, 0.2, 1.0, 0.5, {-2.0, 2.0}, cfg);
    CHECK(e.survivor_mass <= 0.05);
}

TEST_CASE("free-domain histogram matches the Gaussian kernel") {
    FreeDomain dom;
    PathConfig cfg;
    cfg.n_paths = 50000;
    cfg.dt_sim = 1e-3;
    cfg.seed = 17;
    std::vector<double> edges;
    for (int b = 0; b <= 16; ++b) edges.push_back(-2.0 + 4.0 * b / 16.0);
    const double tau = 0.7;
    const KilledDensityEstimate e = killed_density_mc(dom, 0.0, 0.0, tau, edges, cfg);
    for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
        const auto Phi = [&](double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0 * tau)); };
        const double expect = Phi(edges[b + 1]) - Phi(edges[b]);
        CHECK(std::abs(e.mass[b] - expect) <= 3.0 * e.se[b] + 1e-4);
    }
}

TEST_CASE("killing only removes mass relative to the free kernel") {
    const Fixture f = make(two_point(), 1.0, 0.02);
    ForwardDomain dom(f.boundaries);
    FreeDomain free_dom;
    PathConfig cfg;
    cfg.n_paths = 30000;
    cfg.dt_sim = 1e-3;
    cfg.seed = 23;
    std::vector<double> edges;
    for (int b = 0; b <= 12; ++b) edges.push_back(-1.5 + 3.0 * b / 12.0);
    const KilledDensityEstimate k = killed_density_mc(dom, 0.1, 0.0, 0.6, edges, cfg);
    const KilledDensityEstimate fr = killed_density_mc(free_dom, 0.1, 0.0, 0.6, edges, cfg);
    for (std::size_t b = 0; b + 1 < edges.size(); ++b)
        CHECK(k.mass[b] <=
              fr.mass[b] + 3.0 * std::sqrt(k.se[b] * k.se[b] + fr.se[b] * fr.se[b]) + 1e-6);
}

TEST_CASE("duality holds on the two-point fixture at modest budgets") {
    const Fixture f = make(two_point(), 1.0, 0.02);
    PathConfig cfg;
    cfg.n_paths = 150000;
    cfg.dt_sim = 2e-3;
    cfg.seed = 41;
    cfg.bridge_correction = true;
    std::vector<double> edges;
    for (int b = 0; b <= 10; ++b) edges.push_back(-1.0 + 2.0 * b / 10.0);
    const DualityResult d =
        check_duality(f.boundaries, f.barrier, 1.0, 0.2, 0.0, 0.8, edges, cfg);
    CHECK(d.max_abs_z <= 4.0);
    // reflection symmetry of the fixture: forward density even in y
    const std::size_t n = d.q_forward.size();
    for (std::size_t b = 0; b < n / 2; ++b)
        CHECK(std::abs(d.q_forward[b] - d.q_forward[n - 1 - b]) <= 0.06);
}

TEST_CASE("time-derivative representation at a continuation probe") {
    const Fixture f = make(two_point(), 1.0, 0.01, {0.24, 0.25, 0.26});
    PathConfig cfg;
    cfg.n_paths = 200000;
    cfg.dt_sim = 1e-4;
    cfg.seed = 57;
    cfg.bridge_correction = true;
    const UtCheckResult u =
        check_ut_representation(f.surface, f.barrier, delta(0.0), 0.25, 0.0, cfg);
    CHECK(u.rel_error <= 0.10);
    CHECK(u.fd_value > 0.0);  // -U_t is a (killed) density integral, hence positive here
}

TEST_CASE("time-derivative representation vanishes in the deep stopping region") {
    const Fixture f = make(two_point(), 1.0, 0.01, {0.24, 0.25, 0.26});
    PathConfig cfg;
    cfg.n_paths = 50000;
    cfg.dt_sim = 1e-3;
    cfg.seed = 58;
    const UtCheckResult u =
        check_ut_representation(f.surface, f.barrier, delta(0.0), 0.25, 2.5, cfg);
    CHECK(std::abs(u.fd_value) <= 1e-9);
    CHECK(std::abs(u.mc_value) <= 0.01);
}
