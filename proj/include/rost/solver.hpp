#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "rost/measure.hpp"
#include "rost/payoff.hpp"

namespace rost {

struct LatticeParams {
    double dx = 0.01;
    double lambda = 0.5;  // dt / (2 dx^2), in (0, 1/2]
    double margin = 5.0;  // grid widening in units of sqrt(T)
    std::optional<std::pair<double, double>> x_range;  // explicit override
};

/// Uniform space-time grid. Nodes sit at integer multiples of dx so that
/// snapped atom locations coincide bit-exactly with node coordinates, and
/// 0 is always a node.
class Lattice {
public:
    static Lattice build(double T, const LatticeParams& p, double cover_lo, double cover_hi);

    double dx() const { return dx_; }
    double dt() const { return dt_; }
    double lambda() const { return lambda_; }
    double T() const { return T_; }
    std::size_t n_steps() const { return n_steps_; }
    std::size_t n_nodes() const { return std::size_t(i_hi_ - i_lo_ + 1); }
    double node(std::size_t i) const { return double(i_lo_ + std::int64_t(i)) * dx_; }
    double x_lo() const { return node(0); }
    double x_hi() const { return node(n_nodes() - 1); }
    std::int64_t i_lo() const { return i_lo_; }

    /// Nearest node index for a location inside the grid.
    std::size_t index_near(double x) const;
    double time(std::size_t k) const { return double(k) * dt_; }

private:
    double dx_ = 0, dt_ = 0, lambda_ = 0, T_ = 0;
    std::int64_t i_lo_ = 0, i_hi_ = 0;
    std::size_t n_steps_ = 0;
};

struct SnapEntry {
    char which;  // 'n' source, 'm' target
    double from;
    double to;
    double bias;
};

struct SnapReport {
    std::vector<SnapEntry> entries;
    double max_bias = 0.0;
};

/// Validated, grid-snapped inputs for one solve.
struct Problem {
    ProbabilityMeasure nu;
    ProbabilityMeasure mu;
    SupportSummary summary;
    PayoffCurve payoff;
    Lattice lattice;
    SnapReport snapping;
    bool upper_finite = true;  // supp(mu) meets (0, inf): upper boundary eventually finite
    bool lower_finite = true;
    ValidationReport validation;
};

/// Validates D.1/D.2, snaps atoms to the nearest node (bias recorded), and
/// assembles payoff + lattice + boundary classification.
/// Throws ValidationError when D.1/D.2 fail.
Problem prepare(const ProbabilityMeasure& nu, const ProbabilityMeasure& mu, double T,
                const LatticeParams& params);

struct SolveConfig {
    double eps_stop = -1.0;            // < 0: default 10 * eps * sup|G|
    std::vector<double> store_times;   // extra full rows to keep (snapped to rows)
    std::size_t auto_store_rows = 65;  // uniform subsample kept in addition
};

/// Backward-induction surface for one horizon.
///
/// Full rows are kept only at stored times; every row keeps its continuation
/// mask extremes plus a small window of values around each mask edge (enough
/// for boundary extraction, smooth-fit quotients and V_t probes).
class ValueSurface {
public:
    static constexpr int kWin = 6;  // window half-width kept around mask edges

    const Lattice& lattice() const { return *lattice_; }
    const PayoffCurve& payoff() const { return *payoff_; }
    double eps_stop() const { return eps_stop_; }
    bool upper_finite() const { return upper_finite_; }
    bool lower_finite() const { return lower_finite_; }
    Extended bhat_plus() const { return bhat_plus_; }
    Extended bhat_minus() const { return bhat_minus_; }

    /// Continuation-mask node index extremes per row (-1: empty row).
    std::int64_t mask_lo(std::size_t k) const { return mask_lo_[k]; }
    std::int64_t mask_hi(std::size_t k) const { return mask_hi_[k]; }
    std::size_t n_rows() const { return mask_lo_.size(); }  // rows 0..n_steps-1 (t < T)

    /// V at (row k, node i) from the per-row window; NaN when outside it.
    double window_value(std::size_t k, std::int64_t i) const;

    /// Stored full rows, keyed by row index.
    const std::map<std::size_t, std::vector<double>>& rows() const { return rows_; }
    bool has_row(std::size_t k) const { return rows_.count(k) != 0; }
    const std::vector<double>& row(std::size_t k) const { return rows_.at(k); }
    double value(std::size_t k, std::size_t i) const { return rows_.at(k)[i]; }
    double u_value(std::size_t k, std::size_t i) const;

    double max_spatial_increment() const { return max_spatial_increment_; }

    friend ValueSurface solve(const Problem&, const SolveConfig&);

private:
    std::shared_ptr<const Lattice> lattice_;
    std::shared_ptr<const PayoffCurve> payoff_;
    double eps_stop_ = 0;
    bool upper_finite_ = true, lower_finite_ = true;
    Extended bhat_plus_, bhat_minus_;
    std::vector<std::int64_t> mask_lo_, mask_hi_;
    // per row: values at [mask_lo-kWin+1 .. mask_lo+kWin] and mirrored at hi
    std::vector<std::int64_t> win_base_lo_, win_base_hi_;
    std::vector<double> win_lo_, win_hi_;  // 2*kWin values each, row-major
    std::map<std::size_t, std::vector<double>> rows_;
    double max_spatial_increment_ = 0;
};

/// Monotone explicit scheme: V[k][i] = max(G_i, lam*(V[k+1][i-1]+V[k+1][i+1])
/// + (1-2lam)*V[k+1][i]), terminal row = G, edges clamped to G.
/// Throws DomainTooNarrow when the mask touches an edge on a finite side.
ValueSurface solve(const Problem& problem, const SolveConfig& config = {});

/// Max |V^{T2}(t + T2 - T1, x) - V^{T1}(t, x)| over shared stored rows and all
/// per-row mask data; the recursions coincide, so the contract is exactly 0.
/// Throws GridMismatch unless both solves share dx, dt and x-nodes.
double horizon_consistency_check(const ProbabilityMeasure& nu, const ProbabilityMeasure& mu,
                                 double T1, double T2, const LatticeParams& params);

struct VtProbeResult {
    double max_abs_vt_near_boundary = 0;  // finite-difference V_t at mask-edge nodes
    double max_heat_residual_interior = 0;
    std::size_t rows_checked = 0;
};

/// Finite-difference V_t on continuation nodes adjacent to the boundary,
/// skipping the terminal layer [T - exclude_terminal, T) where V_t blows up
/// like the incoming source.
VtProbeResult vt_continuity_probe(const ValueSurface& surface, double exclude_terminal);

}  // namespace rost
