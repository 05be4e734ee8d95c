#pragma once

#include <string>
#include <vector>

#include "rost/extended.hpp"

namespace rost {

struct Atom {
    double location;
    double mass;  // > 0
};

/// Constant density on [lo, hi).
struct DensityPiece {
    double lo;
    double hi;       // > lo
    double density;  // >= 0
};

/// Probability measure on the line: finitely many atoms plus a piecewise
/// constant density. CDFs are piecewise linear with jumps at atoms, which
/// keeps the payoff integral exactly piecewise quadratic.
///
/// Construction validates: strictly increasing atom locations, pieces with
/// non-overlapping interiors, total mass 1 within 1e-12 (rejected, never
/// renormalized). Immutable afterwards; safe to share across threads.
class ProbabilityMeasure {
public:
    ProbabilityMeasure(std::vector<Atom> atoms, std::vector<DensityPiece> pieces);

    /// F(x) = m((-inf, x]), right-continuous.
    double cdf(double x) const;

    /// F(x-) = m((-inf, x)); cdf(x) - cdf_left(x) is the atom mass at x.
    double cdf_left(double x) const;

    /// Mass of the open interval (lo, hi). Endpoints may be the sentinel.
    double mass_open(double lo, double hi) const;
    double mass_open(const Extended& lo_abs, const Extended& hi_abs) const;

    double atom_mass_at(double x) const;

    /// Generalized inverse CDF: inf{x : F(x) >= u}, u in [0,1).
    double quantile(double u) const;

    /// Support endpoints (atoms and pieces of positive density only).
    double support_min() const { return supp_min_; }
    double support_max() const { return supp_max_; }

    const std::vector<Atom>& atoms() const { return atoms_; }
    const std::vector<DensityPiece>& pieces() const { return pieces_; }

    /// Sorted locations where the CDF changes slope or jumps.
    std::vector<double> breakpoints() const;

private:
    std::vector<Atom> atoms_;
    std::vector<DensityPiece> pieces_;
    std::vector<double> atom_cum_;   // cumulative atom mass up to and including i
    std::vector<double> piece_cum_;  // cumulative density mass up to end of piece i
    double supp_min_, supp_max_;
};

/// Support descriptors for a problem pair (Eq.-level quantities a+-, mu+-,
/// bhat+-). bhat endpoints of the maximal open target-mass-free interval
/// around the source support; the sentinel marks a half-line free of mass.
struct SupportSummary {
    double a_plus = 0;
    double a_minus = 0;
    double mu_plus = 0;
    double mu_minus = 0;
    Extended bhat_plus;
    Extended bhat_minus;
};

struct ValidationReport {
    bool d1_ok = false;
    bool d2_ok = false;
    bool connected_ok = false;
    std::vector<std::string> messages;
    bool ok() const { return d1_ok && d2_ok && connected_ok; }
};

/// Computes a+-, mu+-, bhat+-. Throws NoGapError when no mass-free interval
/// containing (-a-, a+) exists, and MeasureError when the source support
/// does not straddle the origin (translate coordinates first).
SupportSummary support_summary(const ProbabilityMeasure& nu, const ProbabilityMeasure& mu);

/// Reports on D.1 / D.2 instead of throwing; connected_ok is false exactly
/// when D.1 fails.
ValidationReport validate(const ProbabilityMeasure& nu, const ProbabilityMeasure& mu);

}  // namespace rost
