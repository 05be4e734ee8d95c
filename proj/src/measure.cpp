#include "rost/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rost/errors.hpp"

namespace rost {

namespace {
constexpr double kMassTol = 1e-12;
}

ProbabilityMeasure::ProbabilityMeasure(std::vector<Atom> atoms, std::vector<DensityPiece> pieces)
    : atoms_(std::move(atoms)), pieces_(std::move(pieces)) {
    std::sort(atoms_.begin(), atoms_.end(),
              [](const Atom& a, const Atom& b) { return a.location < b.location; });
    std::sort(pieces_.begin(), pieces_.end(),
              [](const DensityPiece& a, const DensityPiece& b) { return a.lo < b.lo; });

    double total = 0.0;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        const Atom& a = atoms_[i];
        if (!std::isfinite(a.location)) throw MeasureError("atom location must be finite");
        if (!(a.mass > 0)) throw MeasureError("atom mass must be strictly positive");
        if (i > 0 && !(atoms_[i - 1].location < a.location))
            throw MeasureError("atom locations must be strictly increasing");
        total += a.mass;
        atom_cum_.push_back(total);
    }
    double piece_total = 0.0;
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
        const DensityPiece& p = pieces_[i];
        if (!std::isfinite(p.lo) || !std::isfinite(p.hi) || !(p.lo < p.hi))
            throw MeasureError("density piece needs finite lo < hi");
        if (!(p.density >= 0)) throw MeasureError("density must be nonnegative");
        if (i > 0 && p.lo < pieces_[i - 1].hi)
            throw MeasureError("density pieces must have non-overlapping interiors");
        piece_total += p.density * (p.hi - p.lo);
        piece_cum_.push_back(piece_total);
    }
    total += piece_total;
    if (std::abs(total - 1.0) > kMassTol)
        throw MeasureError("total mass is " + std::to_string(total) +
                           ", must be 1 within 1e-12 (renormalize the input)");

    supp_min_ = std::numeric_limits<double>::infinity();
    supp_max_ = -std::numeric_limits<double>::infinity();
    for (const Atom& a : atoms_) {
        supp_min_ = std::min(supp_min_, a.location);
        supp_max_ = std::max(supp_max_, a.location);
    }
    for (const DensityPiece& p : pieces_) {
        if (p.density > 0) {
            supp_min_ = std::min(supp_min_, p.lo);
            supp_max_ = std::max(supp_max_, p.hi);
        }
    }
    if (!std::isfinite(supp_min_)) throw MeasureError("measure has empty support");
}

double ProbabilityMeasure::cdf(double x) const {
    double m = 0.0;
    // atoms with location <= x
    auto it = std::upper_bound(atoms_.begin(), atoms_.end(), x,
                               [](double v, const Atom& a) { return v < a.location; });
    if (it != atoms_.begin()) m += atom_cum_[std::size_t(it - atoms_.begin()) - 1];
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
        const DensityPiece& p = pieces_[i];
        if (x <= p.lo) break;
        m += p.density * (std::min(x, p.hi) - p.lo);
    }
    return m;
}

double ProbabilityMeasure::cdf_left(double x) const {
    double m = 0.0;
    auto it = std::lower_bound(atoms_.begin(), atoms_.end(), x,
                               [](const Atom& a, double v) { return a.location < v; });
    if (it != atoms_.begin()) m += atom_cum_[std::size_t(it - atoms_.begin()) - 1];
    for (const DensityPiece& p : pieces_) {
        if (x <= p.lo) break;
        m += p.density * (std::min(x, p.hi) - p.lo);
    }
    return m;
}

double ProbabilityMeasure::atom_mass_at(double x) const {
    auto it = std::lower_bound(atoms_.begin(), atoms_.end(), x,
                               [](const Atom& a, double v) { return a.location < v; });
    if (it != atoms_.end() && it->location == x) return it->mass;
    return 0.0;
}

double ProbabilityMeasure::mass_open(double lo, double hi) const {
    if (!(lo < hi)) return 0.0;
    return std::max(0.0, cdf_left(hi) - cdf(lo));
}

double ProbabilityMeasure::mass_open(const Extended& lo_abs, const Extended& hi_abs) const {
    // interval (-lo_abs, +hi_abs)
    double hi_mass = hi_abs.is_finite() ? cdf_left(hi_abs.value()) : 1.0;
    double lo_mass = lo_abs.is_finite() ? cdf(-lo_abs.value()) : 0.0;
    if (lo_abs.is_finite() && hi_abs.is_finite() && !(-lo_abs.value() < hi_abs.value())) return 0.0;
    return std::max(0.0, hi_mass - lo_mass);
}

double ProbabilityMeasure::quantile(double u) const {
    if (u <= 0.0) return supp_min_;
    if (u >= 1.0) return supp_max_;
    std::vector<double> bps = breakpoints();
    double prev = bps.front();
    double f_prev = cdf(prev);
    if (u <= f_prev) return prev;  // atom at the lowest breakpoint
    for (std::size_t i = 1; i < bps.size(); ++i) {
        double b = bps[i];
        double f_left = cdf_left(b);
        if (u <= f_left) {
            // crossing strictly inside (prev, b): constant density there
            double dens = (f_left - f_prev) / (b - prev);
            return prev + (u - f_prev) / dens;
        }
        double f_b = cdf(b);
        if (u <= f_b) return b;  // atom jump covers u
        prev = b;
        f_prev = f_b;
    }
    return supp_max_;
}

std::vector<double> ProbabilityMeasure::breakpoints() const {
    std::vector<double> bps;
    for (const Atom& a : atoms_) bps.push_back(a.location);
    for (const DensityPiece& p : pieces_) {
        bps.push_back(p.lo);
        bps.push_back(p.hi);
    }
    std::sort(bps.begin(), bps.end());
    bps.erase(std::unique(bps.begin(), bps.end()), bps.end());
    return bps;
}

namespace {

/// Smallest distance from the origin to target mass strictly on the positive
/// side: sup{b >= 0 : mu((0,b)) = 0}. Sentinel when the half-line is free.
Extended first_mass_right(const ProbabilityMeasure& mu) {
    double best = std::numeric_limits<double>::infinity();
    for (const Atom& a : mu.atoms())
        if (a.location > 0) { best = std::min(best, a.location); break; }
    for (const DensityPiece& p : mu.pieces())
        if (p.density > 0 && p.hi > 0) best = std::min(best, std::max(p.lo, 0.0));
    return std::isfinite(best) ? Extended::finite(best) : Extended::infinity();
}

Extended first_mass_left(const ProbabilityMeasure& mu) {
    double best = std::numeric_limits<double>::infinity();
    for (auto it = mu.atoms().rbegin(); it != mu.atoms().rend(); ++it)
        if (it->location < 0) { best = std::min(best, -it->location); break; }
    for (const DensityPiece& p : mu.pieces())
        if (p.density > 0 && p.lo < 0) best = std::min(best, -std::min(p.hi, 0.0));
    return std::isfinite(best) ? Extended::finite(best) : Extended::infinity();
}

}  // namespace

SupportSummary support_summary(const ProbabilityMeasure& nu, const ProbabilityMeasure& mu) {
    SupportSummary s;
    s.a_plus = nu.support_max();
    s.a_minus = -nu.support_min();
    if (s.a_plus < 0 || s.a_minus < 0)
        throw MeasureError("source support must straddle the origin (a+ >= 0 and a- >= 0); "
                           "translate coordinates first");
    s.mu_plus = mu.support_max();
    s.mu_minus = -mu.support_min();

    const Extended m_pos = first_mass_right(mu);
    const Extended m_neg = first_mass_left(mu);
    const double mu0 = mu.atom_mass_at(0.0);

    if (mu0 == 0.0) {
        if (!m_pos.at_least(s.a_plus) || !m_neg.at_least(s.a_minus))
            throw NoGapError("every interval containing (-a-, a+) carries target mass (D.1)");
        s.bhat_plus = m_pos;
        s.bhat_minus = m_neg;
        return s;
    }

    // Target atom at the origin: the mass-free interval cannot contain 0.
    if (s.a_plus > 0 && s.a_minus > 0)
        throw NoGapError("target atom at 0 lies inside (-a-, a+) (D.1)");
    if (s.a_plus > 0) {
        if (!m_pos.at_least(s.a_plus))
            throw NoGapError("no mass-free interval contains (0, a+) (D.1)");
        s.bhat_plus = m_pos;
        s.bhat_minus = Extended::finite(0.0);
    } else if (s.a_minus > 0) {
        if (!m_neg.at_least(s.a_minus))
            throw NoGapError("no mass-free interval contains (-a-, 0) (D.1)");
        s.bhat_minus = m_neg;
        s.bhat_plus = Extended::finite(0.0);
    } else if (m_neg.exceeds(0.0)) {
        // degenerate core; deterministic tie-break toward the left-extending gap
        s.bhat_minus = m_neg;
        s.bhat_plus = Extended::finite(0.0);
    } else if (m_pos.exceeds(0.0)) {
        s.bhat_plus = m_pos;
        s.bhat_minus = Extended::finite(0.0);
    } else {
        s.bhat_plus = Extended::finite(0.0);
        s.bhat_minus = Extended::finite(0.0);
    }
    return s;
}

ValidationReport validate(const ProbabilityMeasure& nu, const ProbabilityMeasure& mu) {
    ValidationReport r;
    SupportSummary s;
    try {
        s = support_summary(nu, mu);
    } catch (const NoGapError& e) {
        r.d1_ok = false;
        r.connected_ok = false;
        r.d2_ok = false;
        r.messages.push_back(std::string("D.1 fails: ") + e.what());
        return r;
    } catch (const MeasureError& e) {
        r.d1_ok = false;
        r.connected_ok = false;
        r.d2_ok = false;
        r.messages.push_back(e.what());
        return r;
    }
    r.d1_ok = true;
    r.connected_ok = true;
    r.d2_ok = true;
    if (s.bhat_plus.is_finite() && s.bhat_plus.value() == s.a_plus &&
        mu.atom_mass_at(s.bhat_plus.value()) > 0) {
        r.d2_ok = false;
        r.messages.push_back("D.2 fails: bhat+ = a+ with a target atom at bhat+");
    }
    if (s.bhat_minus.is_finite() && s.bhat_minus.value() == s.a_minus &&
        mu.atom_mass_at(-s.bhat_minus.value()) > 0) {
        r.d2_ok = false;
        r.messages.push_back("D.2 fails: bhat- = a- with a target atom at -bhat-");
    }
    if (r.ok()) r.messages.push_back("D.1 and D.2 hold");
    return r;
}

}  // namespace rost
