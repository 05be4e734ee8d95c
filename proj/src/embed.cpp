#include "rost/embed.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>

#include "rost/rng.hpp"

namespace rost {

namespace {

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("ROSTBAR_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? int(hc) : 1;
}

/// Runs fn(first, last) over a partition of [0, n). Worker results must be
/// written to per-path slots (or integer accumulators) so that the outcome
/// does not depend on the partition.
template <typename Fn>
void parallel_ranges(std::size_t n, int n_threads, Fn&& fn) {
    const int workers = std::max(1, std::min<int>(n_threads, int(n)));
    if (workers == 1) {
        fn(std::size_t(0), n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(std::size_t(workers));
    const std::size_t chunk = (n + std::size_t(workers) - 1) / std::size_t(workers);
    for (int w = 0; w < workers; ++w) {
        const std::size_t first = std::size_t(w) * chunk;
        const std::size_t last = std::min(n, first + chunk);
        if (first >= last) break;
        pool.emplace_back([&fn, first, last] { fn(first, last); });
    }
    for (auto& th : pool) th.join();
}

struct StepGrid {
    std::size_t n_steps;
    std::size_t sub;   // knots per sim step when h >= dt, else 0
    std::size_t frac;  // sim steps per knot when h < dt, else 0
    double h;

    std::size_t knot_of(std::size_t k, std::size_t n_knots) const {
        std::size_t j = sub ? k * sub : (k + frac - 1) / frac;
        return std::min(j, n_knots);
    }
};

StepGrid make_step_grid(double dt_knot, double dt_sim, double t_max) {
    if (!(dt_sim > 0)) throw std::invalid_argument("dt_sim must be positive");
    StepGrid g{};
    g.h = dt_sim;
    g.n_steps = std::size_t(std::llround(t_max / dt_sim));
    if (std::abs(double(g.n_steps) * dt_sim - t_max) > 1e-9 * std::max(1.0, t_max))
        throw std::invalid_argument("t_max must be a multiple of dt_sim");
    const double ratio = dt_knot / dt_sim;
    if (ratio >= 1.0) {
        g.frac = std::size_t(std::llround(ratio));
        if (std::abs(double(g.frac) * dt_sim - dt_knot) > 1e-12)
            throw std::invalid_argument("dt_sim must divide the barrier knot spacing");
    } else {
        g.sub = std::size_t(std::llround(1.0 / ratio));
        if (std::abs(double(g.sub) * dt_knot - dt_sim) > 1e-12)
            throw std::invalid_argument(
                "dt_sim must be commensurate with the barrier knot spacing");
    }
    return g;
}

}  // namespace

double sample_initial(const ProbabilityMeasure& nu, double u) { return nu.quantile(u); }

namespace {

/// Core walk shared by the embedding and the killed-density estimators.
/// Returns true when absorbed; w_out then holds the recorded exit value.
template <typename UpperFn, typename LowerFn>
bool walk(Rng& rng, double x0, const StepGrid& grid, std::size_t first_step,
          std::size_t last_step, bool bridge, double resolve_floor, UpperFn&& upper,
          LowerFn&& lower_abs, double& w_out, double& sigma_out) {
    const double sq = std::sqrt(grid.h);
    double w = x0;
    for (std::size_t k = first_step; k <= last_step; ++k) {
        const double w0 = w;
        w += sq * rng.normal();
        const Extended up = upper(k);
        const Extended dn = lower_abs(k);
        const bool up_on = up.is_finite() && up.value() >= resolve_floor;
        const bool dn_on = dn.is_finite() && dn.value() >= resolve_floor;
        if (up_on && w >= up.value()) {
            w_out = up.value();
            sigma_out = double(k) * grid.h;
            return true;
        }
        if (dn_on && w <= -dn.value()) {
            w_out = -dn.value();
            sigma_out = double(k) * grid.h;
            return true;
        }
        if (bridge) {
            if (up_on) {
                const double a = up.value() - w0, b = up.value() - w;
                if (a > 0 && b > 0 && rng.uniform() < std::exp(-2.0 * a * b / grid.h)) {
                    w_out = up.value();
                    sigma_out = double(k) * grid.h;
                    return true;
                }
            }
            if (dn_on) {
                const double a = w0 + dn.value(), b = w + dn.value();
                if (a > 0 && b > 0 && rng.uniform() < std::exp(-2.0 * a * b / grid.h)) {
                    w_out = -dn.value();
                    sigma_out = double(k) * grid.h;
                    return true;
                }
            }
        }
    }
    w_out = w;
    sigma_out = double(last_step) * grid.h;
    return false;
}

}  // namespace

PathResult simulate_sigma_star(const ReversedBarrier& barrier, double x0, const PathConfig& cfg,
                               std::uint64_t path_index) {
    // immediate exit when the start sits strictly outside (-s-(0+), s+(0+))
    if ((barrier.s0_plus().is_finite() && x0 > barrier.s0_plus().value()) ||
        (barrier.s0_minus().is_finite() && x0 < -barrier.s0_minus().value()))
        return {true, 0.0, x0};

    const StepGrid grid = make_step_grid(barrier.dt(), cfg.dt_sim, cfg.t_max);
    const double floor = cfg.resolve_cells * barrier.dx();
    Rng rng(cfg.seed, 2 * path_index + 1);
    const std::size_t n_knots = barrier.n_knots();
    PathResult r;
    r.absorbed = walk(
        rng, x0, grid, 1, grid.n_steps, cfg.bridge_correction, floor,
        [&](std::size_t k) { return barrier.plus_knot(grid.knot_of(k, n_knots)); },
        [&](std::size_t k) { return barrier.minus_knot(grid.knot_of(k, n_knots)); }, r.w,
        r.sigma);
    if (!r.absorbed) r.sigma = cfg.t_max;
    return r;
}

EmbeddingReport verify_embedding(const ReversedBarrier& barrier, const ProbabilityMeasure& nu,
                                 const ProbabilityMeasure& mu, const PathConfig& cfg,
                                 double atom_tol) {
    const std::size_t n = cfg.n_paths;
    std::vector<PathResult> results(n);
    parallel_ranges(n, resolve_threads(cfg.n_threads), [&](std::size_t first, std::size_t last) {
        for (std::size_t i = first; i < last; ++i) {
            Rng init(cfg.seed, 2 * i);
            const double x0 = sample_initial(nu, init.uniform());
            results[i] = simulate_sigma_star(barrier, x0, cfg, i);
        }
    });

    EmbeddingReport rep;
    rep.n_paths = n;
    rep.atom_tol = atom_tol;
    rep.absorbed_flags.resize(n);
    std::vector<double> sigmas;
    for (std::size_t i = 0; i < n; ++i) {
        rep.absorbed_flags[i] = results[i].absorbed ? 1 : 0;
        if (results[i].absorbed) {
            rep.samples.push_back(results[i].w);
            sigmas.push_back(results[i].sigma);
        }
    }
    rep.absorbed_fraction = double(rep.samples.size()) / double(n);

    std::vector<double> sorted = rep.samples;
    std::sort(sorted.begin(), sorted.end());
    const auto f_emp = [&](double x) {
        return double(std::upper_bound(sorted.begin(), sorted.end(), x) - sorted.begin()) /
               double(n);
    };
    const auto f_emp_left = [&](double x) {
        return double(std::lower_bound(sorted.begin(), sorted.end(), x) - sorted.begin()) /
               double(n);
    };
    std::vector<double> pts = mu.breakpoints();
    const double lo = mu.support_min() - 0.5, hi = mu.support_max() + 0.5;
    for (int j = 0; j <= 256; ++j) pts.push_back(lo + (hi - lo) * double(j) / 256.0);
    double d = 0.0;
    for (double x : pts) {
        d = std::max(d, std::abs(f_emp(x) - mu.cdf(x)));
        d = std::max(d, std::abs(f_emp_left(x) - mu.cdf_left(x)));
    }
    rep.ks_distance = d;

    for (const Atom& a : mu.atoms()) {
        const double c = f_emp(a.location + atom_tol) - f_emp_left(a.location - atom_tol);
        rep.atom_frequencies[a.location] = c;
    }
    std::sort(sigmas.begin(), sigmas.end());
    for (double q : {0.10, 0.25, 0.50, 0.75, 0.90}) {
        rep.sigma_quantiles.push_back(
            sigmas.empty() ? 0.0
                           : sigmas[std::min(sigmas.size() - 1,
                                             std::size_t(q * double(sigmas.size())))]);
    }
    return rep;
}

KilledDensityEstimate killed_density_mc(const KillDomain& domain, double t0, double x0,
                                        double t1, const std::vector<double>& bin_edges,
                                        const PathConfig& cfg, double resolve_floor) {
    if (!(t1 > t0)) throw std::invalid_argument("need t1 > t0");
    if (bin_edges.size() < 2) throw std::invalid_argument("need at least one bin");
    const StepGrid grid = make_step_grid(cfg.dt_sim, cfg.dt_sim, t1 - t0);  // checks per step
    const std::size_t n_bins = bin_edges.size() - 1;
    const int workers = resolve_threads(cfg.n_threads);
    std::vector<std::vector<std::uint64_t>> counts(std::size_t(workers) + 1,
                                                   std::vector<std::uint64_t>(n_bins, 0));
    std::vector<std::uint64_t> survivors(std::size_t(workers) + 1, 0);
    std::atomic_size_t worker_ids{0};

    parallel_ranges(cfg.n_paths, workers, [&](std::size_t first, std::size_t last) {
        const std::size_t wid = worker_ids.fetch_add(1);
        auto& my = counts[wid];
        std::uint64_t surv = 0;
        for (std::size_t i = first; i < last; ++i) {
            Rng rng(cfg.seed, 2 * i + 1);
            double w = 0, sig = 0;
            const bool dead = walk(
                rng, x0, grid, 1, grid.n_steps, cfg.bridge_correction, resolve_floor,
                [&](std::size_t k) { return domain.upper(t0 + double(k) * grid.h); },
                [&](std::size_t k) { return domain.lower_abs(t0 + double(k) * grid.h); }, w,
                sig);
            if (!dead) {
                ++surv;
                const auto it = std::upper_bound(bin_edges.begin(), bin_edges.end(), w);
                if (it != bin_edges.begin() && it != bin_edges.end())
                    ++my[std::size_t(it - bin_edges.begin()) - 1];
            }
        }
        survivors[wid] = surv;
    });

    KilledDensityEstimate est;
    est.bin_edges = bin_edges;
    est.mass.assign(n_bins, 0.0);
    est.se.assign(n_bins, 0.0);
    std::uint64_t surv_total = 0;
    for (std::size_t wdx = 0; wdx < counts.size(); ++wdx) {
        surv_total += survivors[wdx];
        for (std::size_t b = 0; b < n_bins; ++b) est.mass[b] += double(counts[wdx][b]);
    }
    const double n = double(cfg.n_paths);
    for (std::size_t b = 0; b < n_bins; ++b) {
        const double p = est.mass[b] / n;
        est.mass[b] = p;
        est.se[b] = std::sqrt(std::max(0.0, p * (1.0 - p) / n));
    }
    est.survivor_mass = double(surv_total) / n;
    return est;
}

DualityResult check_duality(const BoundarySet& boundaries, const ReversedBarrier& barrier,
                            double T, double t, double x, double s,
                            const std::vector<double>& bin_edges, const PathConfig& cfg) {
    if (!(t < s && s <= T)) throw std::invalid_argument("need t < s <= T");
    const std::size_t n_bins = bin_edges.size() - 1;

    ForwardDomain fwd(boundaries);
    KilledDensityEstimate f = killed_density_mc(fwd, t, x, s, bin_edges, cfg, 0.0);

    // reverse direction: starts spread uniformly over the binned range at
    // time T-s, killed inside the reversed barrier, scored in a window
    // around x at time T-t
    const double range_lo = bin_edges.front(), range_hi = bin_edges.back();
    const double win = (range_hi - range_lo) / double(n_bins);
    const StepGrid grid = make_step_grid(barrier.dt(), cfg.dt_sim, s - t);
    const double t_rev0 = T - s;
    const std::size_t n_knots = barrier.n_knots();
    const int workers = resolve_threads(cfg.n_threads);
    std::vector<std::vector<std::uint64_t>> hits(std::size_t(workers) + 1,
                                                 std::vector<std::uint64_t>(n_bins, 0));
    std::vector<std::vector<std::uint64_t>> starts(std::size_t(workers) + 1,
                                                   std::vector<std::uint64_t>(n_bins, 0));
    std::atomic_size_t worker_ids{0};
    const std::size_t off0 = std::size_t(std::llround(t_rev0 / cfg.dt_sim));

    parallel_ranges(cfg.n_paths, workers, [&](std::size_t first, std::size_t last) {
        const std::size_t wid = worker_ids.fetch_add(1);
        for (std::size_t i = first; i < last; ++i) {
            Rng rng(cfg.seed, 2 * i);
            const double y = range_lo + (range_hi - range_lo) * rng.uniform();
            const std::size_t b0 = std::min(n_bins - 1, std::size_t((y - range_lo) / win));
            ++starts[wid][b0];
            double w = 0, sig = 0;
            const bool dead = walk(
                rng, y, grid, 1, grid.n_steps, cfg.bridge_correction, 0.0,
                [&](std::size_t k) { return barrier.plus_knot(grid.knot_of(k + off0, n_knots)); },
                [&](std::size_t k) {
                    return barrier.minus_knot(grid.knot_of(k + off0, n_knots));
                },
                w, sig);
            if (!dead && std::abs(w - x) <= win / 2.0) ++hits[wid][b0];
        }
    });

    DualityResult res;
    res.q_forward.assign(n_bins, 0.0);
    res.q_reverse.assign(n_bins, 0.0);
    res.z_scores.assign(n_bins, 0.0);
    for (std::size_t b = 0; b < n_bins; ++b) {
        std::uint64_t hit = 0, start = 0;
        for (std::size_t wdx = 0; wdx < hits.size(); ++wdx) {
            hit += hits[wdx][b];
            start += starts[wdx][b];
        }
        const double width = bin_edges[b + 1] - bin_edges[b];
        const double qf = f.mass[b] / width;
        const double sef = f.se[b] / width;
        const double pr = start ? double(hit) / double(start) : 0.0;
        const double qr = start ? pr / win : 0.0;
        const double ser =
            start ? std::sqrt(std::max(0.0, pr * (1.0 - pr) / double(start))) / win : 0.0;
        res.q_forward[b] = qf;
        res.q_reverse[b] = qr;
        const double denom = std::sqrt(sef * sef + ser * ser);
        res.z_scores[b] = denom > 0 ? (qf - qr) / denom : 0.0;
        res.max_abs_z = std::max(res.max_abs_z, std::abs(res.z_scores[b]));
    }
    return res;
}

UtCheckResult check_ut_representation(const ValueSurface& surface,
                                      const ReversedBarrier& barrier,
                                      const ProbabilityMeasure& nu, double t, double x,
                                      const PathConfig& cfg, double kernel_bandwidth,
                                      double denom_floor) {
    const Lattice& L = surface.lattice();
    const double T = L.T();
    const double dt = L.dt();
    // central difference over +-delta, snapped to stored rows
    const std::size_t stride = std::max<std::size_t>(1, std::size_t(std::llround(0.01 / dt)));
    const std::size_t k = std::size_t(std::llround(t / dt));
    const std::size_t kd = k - std::min(k, stride), ku = k + stride;
    if (!surface.has_row(kd) || !surface.has_row(ku))
        throw std::invalid_argument("solve must store rows at the probe time +- 0.01");
    const std::size_t i = L.index_near(x);
    const double fd =
        -(surface.u_value(ku, i) - surface.u_value(kd, i)) / (double(ku - kd) * dt);

    // MC side: reverse-killed paths started from nu at time 0, run to T - t,
    // kernel-density evaluated at x
    const double dur = T - t;
    const StepGrid grid = make_step_grid(barrier.dt(), cfg.dt_sim, dur);
    const double floor = cfg.resolve_cells * barrier.dx();
    const std::size_t n_knots = barrier.n_knots();
    std::vector<double> kernel_vals(cfg.n_paths, 0.0);
    parallel_ranges(cfg.n_paths, resolve_threads(cfg.n_threads),
                    [&](std::size_t first, std::size_t last) {
                        for (std::size_t i2 = first; i2 < last; ++i2) {
                            Rng init(cfg.seed, 2 * i2);
                            const double y = sample_initial(nu, init.uniform());
                            Rng rng(cfg.seed, 2 * i2 + 1);
                            double w = 0, sig = 0;
                            const bool dead = walk(
                                rng, y, grid, 1, grid.n_steps, cfg.bridge_correction, floor,
                                [&](std::size_t kk) {
                                    return barrier.plus_knot(grid.knot_of(kk, n_knots));
                                },
                                [&](std::size_t kk) {
                                    return barrier.minus_knot(grid.knot_of(kk, n_knots));
                                },
                                w, sig);
                            if (!dead) {
                                const double v = (w - x) / kernel_bandwidth;
                                if (std::abs(v) < 1.0) kernel_vals[i2] = 0.75 * (1.0 - v * v);
                            }
                        }
                    });
    double acc = 0.0;
    for (double v : kernel_vals) acc += v;  // fixed order: thread-count invariant
    const double mc = acc / (double(cfg.n_paths) * kernel_bandwidth);

    UtCheckResult r;
    r.fd_value = fd;
    r.mc_value = mc;
    r.rel_error = std::abs(fd - mc) / std::max(std::abs(fd), denom_floor);
    return r;
}

}  // namespace rost
