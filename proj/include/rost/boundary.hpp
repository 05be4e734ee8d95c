#pragma once

#include <vector>

#include "rost/extended.hpp"
#include "rost/measure.hpp"
#include "rost/solver.hpp"

namespace rost {

/// Optimal stopping boundaries b+-(t_k) on the solve grid, t_k < T.
///
/// `b_plus` / `b_minus` are the official (enforced) boundaries: isotonic in
/// time and floored at bhat+- (the theory pins b+-(t) >= bhat+- at every t,
/// while the raw mask collapses inside the terminal layer where U decays
/// below any threshold). `raw_*` keep the pre-enforcement half-cell values.
struct BoundarySet {
    double dt = 0;
    double dx = 0;
    double T = 0;
    std::vector<Extended> b_plus, b_minus;    // enforced, per row k = 0..n-1
    std::vector<Extended> raw_plus, raw_minus;
    Extended bhat_plus, bhat_minus;
    double max_isotonic_violation = 0;  // pre-enforcement, must be <= dx
    double time(std::size_t k) const { return double(k) * dt; }
    std::size_t n_rows() const { return b_plus.size(); }

    /// Right-continuous row lookup b(t) for t in [0, T).
    Extended plus_at(double t) const;
    Extended minus_at(double t) const;
};

BoundarySet extract_boundaries(const ValueSurface& surface, double eps_stop);

/// Time-reversed barrier s+-(u) = b+-(T - u) at knots u_j = j*dt, j = 1..n,
/// with s+-(0) = bhat+- and the left-continuous step convention between
/// knots. Beyond T the last knot value extends, so simulations may run past
/// the solve horizon.
class ReversedBarrier {
public:
    ReversedBarrier(std::vector<Extended> s_plus, std::vector<Extended> s_minus, Extended s0_plus,
                    Extended s0_minus, double dt, double dx, double T);

    double dt() const { return dt_; }
    double dx() const { return dx_; }
    double horizon() const { return T_; }
    std::size_t n_knots() const { return s_plus_.size(); }
    Extended s0_plus() const { return s0_plus_; }
    Extended s0_minus() const { return s0_minus_; }
    const std::vector<Extended>& plus_knots() const { return s_plus_; }
    const std::vector<Extended>& minus_knots() const { return s_minus_; }

    /// Level governing time u > 0 (left-continuous step lookup).
    Extended plus_at(double u) const { return at(s_plus_, s0_plus_, u); }
    Extended minus_at(double u) const { return at(s_minus_, s0_minus_, u); }

    /// Level at knot index j (1-based); j = 0 gives s(0) = bhat.
    Extended plus_knot(std::size_t j) const { return j == 0 ? s0_plus_ : s_plus_[j - 1]; }
    Extended minus_knot(std::size_t j) const { return j == 0 ? s0_minus_ : s_minus_[j - 1]; }

private:
    Extended at(const std::vector<Extended>& s, const Extended& s0, double u) const;
    std::vector<Extended> s_plus_, s_minus_;
    Extended s0_plus_, s0_minus_;
    double dt_, dx_, T_;
};

ReversedBarrier reverse(const BoundarySet& b, double T);

/// Round trip back to boundary rows (exact on the knot grid).
BoundarySet reverse_back(const ReversedBarrier& r);

/// Generalized inverse phi(x) = inf{t >= 0 : s(t) > |x| on the matching side}
/// and T_star(x) = T - phi(x).
class InverseBarrier {
public:
    explicit InverseBarrier(const ReversedBarrier& r) : barrier_(&r) {}

    /// Sentinel when the level never exceeds |x|.
    Extended phi(double x) const;
    Extended t_star(double x, double T) const;

    /// Membership x in (-s-(t), s+(t)).
    bool inside(double t, double x) const;

private:
    const ReversedBarrier* barrier_;
};

struct FlatSegment {
    double level;    // signed: -s- for the lower side
    double t_start;  // flat covers (t_start, t_end]
    double t_end;
    char side;       // '+' or '-'
};

/// Flat stretches of s+- (atoms of the target show up as these). A window
/// counts only when it is delimited on both sides by resolvable structure
/// (domain edge, a fast multi-cell ramp, or a level gap > level_tol + 2 dx);
/// single-cell quantization walks of a slowly moving boundary never qualify.
std::vector<FlatSegment> detect_flats(const ReversedBarrier& r, double level_tol,
                                      double min_width);

struct JumpEvent {
    double t;             // end of residence at level_before
    double level_before;  // signed levels as in FlatSegment
    double level_after;
    double gap_mu_mass;   // target mass of the open interval between levels
    char side;
    bool to_infinity;
};

/// Jumps of s+- across target-mass gaps: transitions between consecutive
/// resident levels (residence >= min_residence) further apart than jump_tol.
std::vector<JumpEvent> detect_jumps(const ReversedBarrier& r, double jump_tol,
                                    const ProbabilityMeasure& mu,
                                    double min_residence = -1.0);

}  // namespace rost
