#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include "rost/payoff.hpp"

namespace rost {

using Rational = boost::multiprecision::cpp_rational;

/// Symmetric +-dx walk with dt = dx^2, depth <= 4. The recombining lattice
/// carries the values; stopping rules are enumerated on the non-recombining
/// tree so path-dependent rules are genuinely covered.
struct TinyTree {
    int depth = 1;        // <= 4
    double dx_tree = 1.0;
    double x0 = 0.0;
    double dt_tree() const { return dx_tree * dx_tree; }
};

/// Payoff at tree node (level j in [-depth, depth]); the double is converted
/// to an exact rational, so both oracle routes share bit-identical inputs.
Rational tree_payoff(const PayoffCurve& payoff, const TinyTree& tree, int level);

/// Max over all adapted stop/continue rules of the expected payoff, in exact
/// arithmetic over dyadic path probabilities. Throws DepthExceeded above 4.
Rational oracle_enumerate(const PayoffCurve& payoff, const TinyTree& tree);

/// Backward induction max(G, (V_up + V_down)/2) on the recombining lattice,
/// same exact arithmetic. Snell optimality makes it equal oracle_enumerate.
Rational oracle_backward_induction(const PayoffCurve& payoff, const TinyTree& tree);

}  // namespace rost
