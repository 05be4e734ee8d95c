#include "rost/boundary.hpp"

#include <algorithm>
#include <cmath>

#include "rost/errors.hpp"

namespace rost {

Extended BoundarySet::plus_at(double t) const {
    const std::size_t k = std::min(n_rows() - 1, std::size_t(std::max(0.0, std::floor(t / dt))));
    return b_plus[k];
}

Extended BoundarySet::minus_at(double t) const {
    const std::size_t k = std::min(n_rows() - 1, std::size_t(std::max(0.0, std::floor(t / dt))));
    return b_minus[k];
}

BoundarySet extract_boundaries(const ValueSurface& S, double eps_stop) {
    if (eps_stop != S.eps_stop())
        throw std::invalid_argument(
            "eps_stop differs from the surface's threshold; re-solve with the desired value");
    const Lattice& L = S.lattice();
    const std::size_t n = S.n_rows();
    const std::size_t N = L.n_nodes();
    BoundarySet B;
    B.dt = L.dt();
    B.dx = L.dx();
    B.T = L.T();
    B.bhat_plus = S.bhat_plus();
    B.bhat_minus = S.bhat_minus();
    B.raw_plus.resize(n);
    B.raw_minus.resize(n);

    const double half = L.dx() / 2.0;
    for (std::size_t k = 0; k < n; ++k) {
        const std::int64_t lo = S.mask_lo(k), hi = S.mask_hi(k);
        if (lo < 0)
            throw ClassificationConflict("empty continuation mask at t=" +
                                         std::to_string(B.time(k)) +
                                         "; inputs are degenerate for this lattice");
        if (S.upper_finite()) {
            if (hi >= std::int64_t(N) - 2)
                throw ClassificationConflict(
                    "mask at the upper lattice edge on a side classified finite");
            B.raw_plus[k] = Extended::finite(L.node(std::size_t(hi)) + half);
        } else {
            B.raw_plus[k] = Extended::infinity();
        }
        if (S.lower_finite()) {
            if (lo <= 1)
                throw ClassificationConflict(
                    "mask at the lower lattice edge on a side classified finite");
            B.raw_minus[k] = Extended::finite(-(L.node(std::size_t(lo)) - half));
        } else {
            B.raw_minus[k] = Extended::infinity();
        }
    }

    // isotonic pass (theory: b decreasing in t) + floor at bhat (theory:
    // the mass-free gap is continuation at every t, so b(t) >= bhat)
    auto enforce = [&](const std::vector<Extended>& raw, const Extended& bhat) {
        std::vector<Extended> out(raw);
        double viol = 0.0;
        for (std::size_t k = 0; k + 1 < n; ++k) {
            if (raw[k].is_finite() && raw[k + 1].is_finite())
                viol = std::max(viol, raw[k + 1].value() - raw[k].value());
            if (raw[k].is_infinite() && raw[k + 1].is_finite()) viol = std::max(viol, 0.0);
        }
        for (std::size_t k = n - 1; k-- > 0;) out[k] = max(out[k], out[k + 1]);
        if (bhat.is_finite()) {
            for (auto& e : out)
                if (e.is_finite()) e = Extended::finite(std::max(e.value(), bhat.value()));
        }
        return std::pair(out, viol);
    };
    auto [bp, vp] = enforce(B.raw_plus, B.bhat_plus);
    auto [bm, vm] = enforce(B.raw_minus, B.bhat_minus);
    B.b_plus = std::move(bp);
    B.b_minus = std::move(bm);
    B.max_isotonic_violation = std::max(vp, vm);
    return B;
}

ReversedBarrier::ReversedBarrier(std::vector<Extended> s_plus, std::vector<Extended> s_minus,
                                 Extended s0_plus, Extended s0_minus, double dt, double dx,
                                 double T)
    : s_plus_(std::move(s_plus)),
      s_minus_(std::move(s_minus)),
      s0_plus_(s0_plus),
      s0_minus_(s0_minus),
      dt_(dt),
      dx_(dx),
      T_(T) {
    if (s_plus_.size() != s_minus_.size() || s_plus_.empty())
        throw std::invalid_argument("barrier needs matching non-empty knot arrays");
    for (std::size_t j = 0; j < s_plus_.size(); ++j)
        if (s_plus_[j].is_infinite() && s_minus_[j].is_infinite())
            throw std::invalid_argument(
                "both barrier sides infinite at one knot; no such barrier embeds a "
                "probability law");
}

Extended ReversedBarrier::at(const std::vector<Extended>& s, const Extended& s0,
                             double u) const {
    if (u <= 0.0) return s0;
    // left-continuous step: value on ((j-1)dt, j dt] is s[j]
    std::size_t j = std::size_t(std::ceil(u / dt_ - 1e-12));
    if (j < 1) j = 1;
    if (j > s.size()) j = s.size();  // constant extension beyond the solve horizon
    return s[j - 1];
}

ReversedBarrier reverse(const BoundarySet& b, double T) {
    if (std::abs(T - b.T) > 1e-12)
        throw std::invalid_argument("reversal horizon must match the boundary set's");
    const std::size_t n = b.n_rows();
    std::vector<Extended> sp(n), sm(n);
    for (std::size_t j = 1; j <= n; ++j) {
        sp[j - 1] = b.b_plus[n - j];   // s(j dt) = b(T - j dt)
        sm[j - 1] = b.b_minus[n - j];
    }
    return ReversedBarrier(std::move(sp), std::move(sm), b.bhat_plus, b.bhat_minus, b.dt, b.dx,
                           T);
}

BoundarySet reverse_back(const ReversedBarrier& r) {
    BoundarySet b;
    b.dt = r.dt();
    b.dx = r.dx();
    b.T = r.horizon();
    b.bhat_plus = r.s0_plus();
    b.bhat_minus = r.s0_minus();
    const std::size_t n = r.n_knots();
    b.b_plus.resize(n);
    b.b_minus.resize(n);
    for (std::size_t j = 1; j <= n; ++j) {
        b.b_plus[n - j] = r.plus_knots()[j - 1];
        b.b_minus[n - j] = r.minus_knots()[j - 1];
    }
    b.raw_plus = b.b_plus;
    b.raw_minus = b.b_minus;
    return b;
}

Extended InverseBarrier::phi(double x) const {
    const ReversedBarrier& r = *barrier_;
    const bool upper = x >= 0;
    const double level = std::abs(x);
    const Extended s0 = upper ? r.s0_plus() : r.s0_minus();
    if (s0.exceeds(level)) return Extended::finite(0.0);
    const auto& knots = upper ? r.plus_knots() : r.minus_knots();
    for (std::size_t j = 1; j <= knots.size(); ++j) {
        if (knots[j - 1].exceeds(level))
            return Extended::finite(double(j - 1) * r.dt());  // inf of ((j-1)dt, j dt]
    }
    return Extended::infinity();
}

Extended InverseBarrier::t_star(double x, double T) const {
    const Extended p = phi(x);
    if (p.is_infinite()) return Extended::finite(0.0);
    if (p.value() >= T) return Extended::finite(0.0);
    return Extended::finite(T - p.value());
}

bool InverseBarrier::inside(double t, double x) const {
    const ReversedBarrier& r = *barrier_;
    const Extended up = t <= 0 ? r.s0_plus() : r.plus_at(t);
    const Extended dn = t <= 0 ? r.s0_minus() : r.minus_at(t);
    return up.exceeds(x) && dn.exceeds(-x);
}

namespace {

struct Run {
    Extended level;
    std::size_t first_knot;  // 1-based
    std::size_t last_knot;
    double width(double dt) const { return double(last_knot - first_knot + 1) * dt; }
};

std::vector<Run> compress(const std::vector<Extended>& knots) {
    std::vector<Run> runs;
    for (std::size_t j = 1; j <= knots.size(); ++j) {
        if (!runs.empty() && runs.back().level == knots[j - 1]) {
            runs.back().last_knot = j;
        } else {
            runs.push_back({knots[j - 1], j, j});
        }
    }
    return runs;
}

double sgn(char side) { return side == '+' ? 1.0 : -1.0; }

}  // namespace

std::vector<FlatSegment> detect_flats(const ReversedBarrier& r, double level_tol,
                                      double min_width) {
    std::vector<FlatSegment> out;
    const double dt = r.dt();
    const double dx = r.dx();
    // a run this short is a transient of the light-cone ramp, not residence
    const std::size_t transient_knots = 5;

    for (char side : {'+', '-'}) {
        const auto& knots = side == '+' ? r.plus_knots() : r.minus_knots();
        std::vector<Run> runs = compress(knots);
        std::size_t i = 0;
        while (i < runs.size()) {
            if (runs[i].level.is_infinite()) {
                ++i;
                continue;
            }
            // greedy maximal group of finite runs within level_tol
            double lo = runs[i].level.value(), hi = lo;
            std::size_t j = i;
            while (j + 1 < runs.size() && runs[j + 1].level.is_finite()) {
                const double v = runs[j + 1].level.value();
                if (std::max(hi, v) - std::min(lo, v) > level_tol) break;
                lo = std::min(lo, v);
                hi = std::max(hi, v);
                ++j;
            }
            const double t_start = double(runs[i].first_knot - 1) * dt;
            const double t_end = double(runs[j].last_knot) * dt;
            const bool wide_enough = (t_end - t_start) >= min_width;

            auto delimiter_ok = [&](bool left) {
                if (left) {
                    if (i == 0) return true;  // domain edge u = 0
                    const Run& prev = runs[i - 1];
                    if (prev.level.is_infinite()) return true;
                    if (prev.last_knot - prev.first_knot + 1 <= transient_knots) return true;
                    return std::abs(prev.level.value() - runs[i].level.value()) >
                           level_tol + 2 * dx;
                }
                if (j + 1 >= runs.size()) return true;  // domain edge u = T
                const Run& nxt = runs[j + 1];
                if (nxt.level.is_infinite()) return true;
                if (nxt.last_knot - nxt.first_knot + 1 <= transient_knots) return true;
                return std::abs(nxt.level.value() - runs[j].level.value()) > level_tol + 2 * dx;
            };

            if (wide_enough && delimiter_ok(true) && delimiter_ok(false)) {
                // report the level of the longest run in the group
                std::size_t best = i;
                for (std::size_t q = i; q <= j; ++q)
                    if (runs[q].last_knot - runs[q].first_knot >
                        runs[best].last_knot - runs[best].first_knot)
                        best = q;
                const double level = runs[best].level.value();
                out.push_back({side == '+' ? level : -level, t_start, t_end, side});
            }
            i = j + 1;
        }
    }
    return out;
}

std::vector<JumpEvent> detect_jumps(const ReversedBarrier& r, double jump_tol,
                                    const ProbabilityMeasure& mu, double min_residence) {
    std::vector<JumpEvent> out;
    const double dt = r.dt();
    if (min_residence < 0) min_residence = 6 * dt;

    for (char side : {'+', '-'}) {
        const auto& knots = side == '+' ? r.plus_knots() : r.minus_knots();
        std::vector<Run> runs = compress(knots);
        const Run* prev_resident = nullptr;
        for (const Run& run : runs) {
            if (run.width(dt) < min_residence) continue;  // ramp transient
            if (prev_resident) {
                const bool was_inf = prev_resident->level.is_infinite();
                const bool is_inf = run.level.is_infinite();
                if (!was_inf && is_inf) {
                    out.push_back({double(prev_resident->last_knot) * dt,
                                   sgn(side) * prev_resident->level.value(), 0.0, 0.0, side,
                                   true});
                } else if (!was_inf && !is_inf &&
                           std::abs(run.level.value() - prev_resident->level.value()) >
                               jump_tol) {
                    const double a = prev_resident->level.value(), b = run.level.value();
                    const double gap_mass =
                        side == '+' ? mu.mass_open(std::min(a, b), std::max(a, b))
                                    : mu.mass_open(-std::max(a, b), -std::min(a, b));
                    out.push_back({double(prev_resident->last_knot) * dt, sgn(side) * a,
                                   sgn(side) * b, gap_mass, side, false});
                }
            }
            prev_resident = &run;
        }
    }
    std::sort(out.begin(), out.end(),
              [](const JumpEvent& a, const JumpEvent& b) { return a.t < b.t; });
    return out;
}

}  // namespace rost
