#include "rost/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <set>

#include "rost/errors.hpp"

namespace rost {

namespace {
constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}  // namespace

Lattice Lattice::build(double T, const LatticeParams& p, double cover_lo, double cover_hi) {
    if (!(p.dx > 0)) throw std::invalid_argument("dx must be positive");
    if (!(p.lambda > 0 && p.lambda <= 0.5))
        throw std::invalid_argument("lambda must lie in (0, 1/2] for a monotone scheme");
    if (!(T > 0)) throw std::invalid_argument("horizon must be positive");
    Lattice L;
    L.dx_ = p.dx;
    L.lambda_ = p.lambda;
    L.T_ = T;
    double x_lo = cover_lo - p.margin * std::sqrt(T);
    double x_hi = cover_hi + p.margin * std::sqrt(T);
    if (p.x_range) {
        x_lo = p.x_range->first;
        x_hi = p.x_range->second;
    }
    L.i_lo_ = std::int64_t(std::floor(x_lo / p.dx));
    L.i_hi_ = std::int64_t(std::ceil(x_hi / p.dx));
    if (L.i_hi_ - L.i_lo_ < 4) throw std::invalid_argument("lattice needs at least 5 nodes");
    // dt from the requested lambda, then rounded so n_steps * dt == T; the
    // effective lambda can only shrink, which preserves monotonicity
    const double dt0 = 2.0 * p.lambda * p.dx * p.dx;
    L.n_steps_ = std::size_t(std::ceil(T / dt0 - 1e-9));
    L.dt_ = T / double(L.n_steps_);
    L.lambda_ = L.dt_ / (2.0 * p.dx * p.dx);
    return L;
}

std::size_t Lattice::index_near(double x) const {
    std::int64_t j = std::llround(x / dx_);
    j = std::max(i_lo_, std::min(i_hi_, j));
    return std::size_t(j - i_lo_);
}

namespace {

ProbabilityMeasure snap_measure(const ProbabilityMeasure& m, double dx, char tag,
                                SnapReport& report) {
    std::vector<Atom> atoms;
    for (const Atom& a : m.atoms()) {
        const double snapped = double(std::llround(a.location / dx)) * dx;
        if (snapped != a.location)
            report.entries.push_back({tag, a.location, snapped, std::abs(snapped - a.location)});
        if (!atoms.empty() && atoms.back().location == snapped) {
            atoms.back().mass += a.mass;  // collision after snapping: merge, bias is recorded
            report.entries.push_back({tag, a.location, snapped, std::abs(snapped - a.location)});
        } else {
            atoms.push_back({snapped, a.mass});
        }
    }
    for (const auto& e : report.entries) report.max_bias = std::max(report.max_bias, e.bias);
    return ProbabilityMeasure(std::move(atoms), m.pieces());
}

}  // namespace

Problem prepare(const ProbabilityMeasure& nu, const ProbabilityMeasure& mu, double T,
                const LatticeParams& params) {
    ValidationReport pre = validate(nu, mu);
    if (!pre.ok()) {
        std::string msg = "input pair fails validation:";
        for (const auto& m : pre.messages) msg += " " + m;
        throw ValidationError(msg);
    }
    SnapReport snapping;
    ProbabilityMeasure nu_s = snap_measure(nu, params.dx, 'n', snapping);
    ProbabilityMeasure mu_s = snap_measure(mu, params.dx, 'm', snapping);
    ValidationReport post = validate(nu_s, mu_s);
    if (!post.ok())
        throw ValidationError("atom snapping at dx=" + std::to_string(params.dx) +
                              " broke D.1/D.2; refine dx");
    SupportSummary summary = support_summary(nu_s, mu_s);
    PayoffCurve payoff = PayoffCurve::build(nu_s, mu_s);
    const double cover_lo = std::min(nu_s.support_min(), mu_s.support_min());
    const double cover_hi = std::max(nu_s.support_max(), mu_s.support_max());
    Lattice lattice = Lattice::build(T, params, cover_lo, cover_hi);
    const bool upper_finite = (1.0 - mu_s.cdf(0.0)) > 0.0;
    const bool lower_finite = mu_s.cdf_left(0.0) > 0.0;
    return Problem{std::move(nu_s), std::move(mu_s), summary,    std::move(payoff),
                   lattice,         snapping,        upper_finite, lower_finite,
                   post};
}

ValueSurface solve(const Problem& problem, const SolveConfig& config) {
    const Lattice& L = problem.lattice;
    const PayoffCurve& G = problem.payoff;
    const std::size_t N = L.n_nodes();
    const std::size_t n = L.n_steps();
    const double lam = L.lambda();
    const double one_m2lam = 1.0 - 2.0 * lam;

    ValueSurface S;
    S.lattice_ = std::make_shared<Lattice>(L);
    S.payoff_ = std::make_shared<PayoffCurve>(G);
    S.upper_finite_ = problem.upper_finite;
    S.lower_finite_ = problem.lower_finite;
    S.bhat_plus_ = problem.summary.bhat_plus;
    S.bhat_minus_ = problem.summary.bhat_minus;
    S.eps_stop_ = config.eps_stop >= 0 ? config.eps_stop
                                       : 10.0 * kEps * std::max(G.sup_abs(), 1e-300);
    const double eps = S.eps_stop_;

    std::vector<double> g(N);
    for (std::size_t i = 0; i < N; ++i) g[i] = G(L.node(i));

    // rows to keep in full
    std::set<std::size_t> keep;
    keep.insert(0);
    keep.insert(n);
    if (config.auto_store_rows > 1) {
        for (std::size_t j = 0; j < config.auto_store_rows; ++j)
            keep.insert(std::size_t(std::llround(double(j) * double(n) /
                                                 double(config.auto_store_rows - 1))));
    }
    for (double t : config.store_times) {
        if (t >= 0 && t <= L.T()) keep.insert(std::size_t(std::llround(t / L.dt())));
    }
    // keep the successor of every stored row so time derivatives are available
    for (std::size_t k : std::set<std::size_t>(keep))
        if (k < n) keep.insert(k + 1);

    constexpr int W = ValueSurface::kWin;
    S.mask_lo_.assign(n, -1);
    S.mask_hi_.assign(n, -1);
    S.win_base_lo_.assign(n, 0);
    S.win_base_hi_.assign(n, 0);
    S.win_lo_.assign(n * 2 * W, kNaN);
    S.win_hi_.assign(n * 2 * W, kNaN);

    std::vector<double> v = g, vn(N);
    if (keep.count(n)) S.rows_[n] = g;

    std::int64_t prev_lo = -1, prev_hi = -1;
    double max_dv = 0.0;
    for (std::size_t i = 0; i + 1 < N; ++i) max_dv = std::max(max_dv, std::abs(g[i + 1] - g[i]));

    for (std::size_t k = n; k-- > 0;) {
        vn[0] = g[0];
        vn[N - 1] = g[N - 1];
        const double* vp = v.data();
        double* vo = vn.data();
        const double* gp = g.data();
        for (std::size_t i = 1; i + 1 < N; ++i) {
            const double cand = lam * (vp[i - 1] + vp[i + 1]) + one_m2lam * vp[i];
            vo[i] = std::max(gp[i], cand);
        }
        // continuation-mask extremes; masks are nested in time, so scan
        // outward from the previous row's extremes
        std::int64_t lo = -1, hi = -1;
        if (prev_lo < 0) {
            for (std::size_t i = 1; i + 1 < N; ++i)
                if (vo[i] - gp[i] > eps) {
                    lo = std::int64_t(i);
                    break;
                }
            if (lo >= 0)
                for (std::size_t i = N - 2; i >= 1; --i)
                    if (vo[i] - gp[i] > eps) {
                        hi = std::int64_t(i);
                        break;
                    }
        } else {
            lo = prev_lo;
            while (lo - 1 >= 1 && vo[lo - 1] - gp[lo - 1] > eps) --lo;
            while (lo <= prev_hi && !(vo[lo] - gp[lo] > eps)) ++lo;
            hi = prev_hi;
            while (hi + 1 <= std::int64_t(N) - 2 && vo[hi + 1] - gp[hi + 1] > eps) ++hi;
            while (hi >= lo && !(vo[hi] - gp[hi] > eps)) --hi;
            if (hi < lo) lo = hi = -1;
        }
        S.mask_lo_[k] = lo;
        S.mask_hi_[k] = hi;
        if (lo >= 0) {
            if (lo <= 1 && problem.lower_finite)
                throw DomainTooNarrow("continuation mask reached the lower lattice edge at t=" +
                                      std::to_string(L.time(k)) +
                                      " on a side classified finite; widen the grid");
            if (hi >= std::int64_t(N) - 2 && problem.upper_finite)
                throw DomainTooNarrow("continuation mask reached the upper lattice edge at t=" +
                                      std::to_string(L.time(k)) +
                                      " on a side classified finite; widen the grid");
            const std::int64_t base_lo = lo - 2;
            const std::int64_t base_hi = hi - 2 * W + 3;
            S.win_base_lo_[k] = base_lo;
            S.win_base_hi_[k] = base_hi;
            for (int j = 0; j < 2 * W; ++j) {
                const std::int64_t il = base_lo + j, ih = base_hi + j;
                if (il >= 0 && il < std::int64_t(N)) S.win_lo_[k * 2 * W + j] = vo[il];
                if (ih >= 0 && ih < std::int64_t(N)) S.win_hi_[k * 2 * W + j] = vo[ih];
            }
        }
        for (std::size_t i = 0; i + 1 < N; ++i)
            max_dv = std::max(max_dv, std::abs(vo[i + 1] - vo[i]));
        if (keep.count(k)) S.rows_[k] = vn;
        v.swap(vn);
        prev_lo = lo;
        prev_hi = hi;
    }
    S.max_spatial_increment_ = max_dv;
    return S;
}

double ValueSurface::window_value(std::size_t k, std::int64_t i) const {
    constexpr int W = kWin;
    if (mask_lo_[k] >= 0) {
        const std::int64_t jl = i - win_base_lo_[k];
        if (jl >= 0 && jl < 2 * W) {
            const double v = win_lo_[k * 2 * W + std::size_t(jl)];
            if (!std::isnan(v)) return v;
        }
        const std::int64_t jh = i - win_base_hi_[k];
        if (jh >= 0 && jh < 2 * W) return win_hi_[k * 2 * W + std::size_t(jh)];
    }
    if (has_row(k)) return rows_.at(k)[std::size_t(i)];
    return kNaN;
}

double ValueSurface::u_value(std::size_t k, std::size_t i) const {
    return rows_.at(k)[i] - (*payoff_)(lattice_->node(i));
}

double horizon_consistency_check(const ProbabilityMeasure& nu, const ProbabilityMeasure& mu,
                                 double T1, double T2, const LatticeParams& params) {
    if (!(T2 > T1 && T1 > 0)) throw std::invalid_argument("need T2 > T1 > 0");
    LatticeParams p = params;
    if (!p.x_range) {
        // shared x-range sized for the larger horizon
        const double lo = std::min(nu.support_min(), mu.support_min()) - p.margin * std::sqrt(T2);
        const double hi = std::max(nu.support_max(), mu.support_max()) + p.margin * std::sqrt(T2);
        p.x_range = {lo, hi};
    }
    const double dt = 2.0 * p.lambda * p.dx * p.dx;
    const double n1 = T1 / dt, n2 = T2 / dt;
    if (std::abs(n1 - std::llround(n1)) > 1e-6 || std::abs(n2 - std::llround(n2)) > 1e-6)
        throw GridMismatch("T1 and T2 must both be integer multiples of dt = 2*lambda*dx^2");

    Problem pr1 = prepare(nu, mu, T1, p);
    Problem pr2 = prepare(nu, mu, T2, p);
    if (pr1.lattice.i_lo() != pr2.lattice.i_lo() || pr1.lattice.n_nodes() != pr2.lattice.n_nodes())
        throw GridMismatch("lattices do not share x-nodes");
    if (std::abs(pr1.lattice.dt() - pr2.lattice.dt()) > 1e-15)
        throw GridMismatch("lattices do not share dt");

    SolveConfig c1, c2;
    const std::size_t shift = pr2.lattice.n_steps() - pr1.lattice.n_steps();
    for (int j = 0; j <= 8; ++j) {
        const double t = T1 * double(j) / 8.0;
        c1.store_times.push_back(t);
        c2.store_times.push_back(t + (T2 - T1));
    }
    ValueSurface s1 = solve(pr1, c1);
    ValueSurface s2 = solve(pr2, c2);

    double dev = 0.0;
    for (const auto& [k1, row1] : s1.rows()) {
        const std::size_t k2 = k1 + shift;
        if (!s2.has_row(k2)) continue;
        const auto& row2 = s2.row(k2);
        for (std::size_t i = 0; i < row1.size(); ++i)
            dev = std::max(dev, std::abs(row1[i] - row2[i]));
    }
    for (std::size_t k = 0; k < s1.n_rows(); ++k) {
        if (s1.mask_lo(k) != s2.mask_lo(k + shift) || s1.mask_hi(k) != s2.mask_hi(k + shift))
            dev = std::max(dev, 1.0);  // mask disagreement counts as a full deviation
    }
    return dev;
}

VtProbeResult vt_continuity_probe(const ValueSurface& S, double exclude_terminal) {
    VtProbeResult r;
    const Lattice& L = S.lattice();
    const PayoffCurve& G = S.payoff();
    const double dt = L.dt(), dx = L.dx();
    const std::size_t k_max =
        std::size_t(std::max(0.0, (L.T() - exclude_terminal) / dt));
    for (std::size_t k = 0; k + 1 < S.n_rows() && k < k_max; ++k) {
        for (std::int64_t i : {S.mask_hi(k), S.mask_lo(k)}) {
            if (i < 0) continue;
            const double v0 = S.window_value(k, i);
            const double v1 = S.window_value(k + 1, i);
            if (std::isnan(v0) || std::isnan(v1)) continue;
            r.max_abs_vt_near_boundary =
                std::max(r.max_abs_vt_near_boundary, std::abs((v1 - v0) / dt));
        }
        ++r.rows_checked;
    }
    // heat residual |V_t + 0.5 V_xx| at stored-row interior continuation nodes
    const auto& rows = S.rows();
    for (auto it = rows.begin(); it != rows.end(); ++it) {
        auto next = std::next(it);
        if (next == rows.end()) break;
        if (next->first != it->first + 1) continue;  // need adjacent rows
        const std::size_t k = it->first;
        if (k >= k_max || k >= S.n_rows()) continue;
        const std::int64_t lo = S.mask_lo(k), hi = S.mask_hi(k);
        if (lo < 0 || hi - lo < 8) continue;
        const auto& bps = G.breakpoints();
        // stay in the middle half of the mask: V_xx changes steeply near the
        // free boundary and the forward-in-time stencil would see it
        const std::int64_t inset = (hi - lo) / 4;
        for (std::int64_t i = lo + inset; i <= hi - inset;
             i += std::max<std::int64_t>(1, (hi - lo) / 16)) {
            // probe only where the stencil sits strictly inside one payoff piece
            const double xl = L.node(std::size_t(i - 1)), xr = L.node(std::size_t(i + 1));
            auto itb = std::upper_bound(bps.begin(), bps.end(), xl);
            if (itb != bps.end() && *itb <= xr) continue;
            const auto& r0 = it->second;
            const auto& r1 = next->second;
            const double vt = (r1[std::size_t(i)] - r0[std::size_t(i)]) / dt;
            const double vxx =
                (r0[std::size_t(i - 1)] - 2 * r0[std::size_t(i)] + r0[std::size_t(i + 1)]) /
                (dx * dx);
            r.max_heat_residual_interior =
                std::max(r.max_heat_residual_interior, std::abs(vt + 0.5 * vxx));
        }
    }
    return r;
}

}  // namespace rost
