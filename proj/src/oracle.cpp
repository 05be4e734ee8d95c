#include "rost/oracle.hpp"

#include <vector>

#include "rost/errors.hpp"

namespace rost {

namespace {

Rational to_rational(double v) {
    // doubles are dyadic rationals; the conversion is exact
    return Rational(v);
}

void check_tree(const TinyTree& tree) {
    if (tree.depth < 0 || tree.depth > 4)
        throw DepthExceeded("tree oracle depth must lie in [0, 4]");
    if (!(tree.dx_tree > 0)) throw std::invalid_argument("dx_tree must be positive");
}

/// All expected-payoff values achievable by adapted rules in the subtree
/// rooted at (steps_left, level). Rule count is 2^(interior nodes); the set
/// below enumerates exactly the values those rules take.
std::vector<Rational> rule_values(const PayoffCurve& payoff, const TinyTree& tree, int level,
                                  int steps_left) {
    const Rational stop_now = tree_payoff(payoff, tree, level);
    if (steps_left == 0) return {stop_now};
    std::vector<Rational> up = rule_values(payoff, tree, level + 1, steps_left - 1);
    std::vector<Rational> down = rule_values(payoff, tree, level - 1, steps_left - 1);
    std::vector<Rational> out;
    out.reserve(1 + up.size() * down.size());
    out.push_back(stop_now);
    const Rational half(1, 2);
    for (const Rational& u : up)
        for (const Rational& d : down) out.push_back(half * (u + d));
    return out;
}

}  // namespace

Rational tree_payoff(const PayoffCurve& payoff, const TinyTree& tree, int level) {
    return to_rational(payoff(tree.x0 + double(level) * tree.dx_tree));
}

Rational oracle_enumerate(const PayoffCurve& payoff, const TinyTree& tree) {
    check_tree(tree);
    std::vector<Rational> vals = rule_values(payoff, tree, 0, tree.depth);
    Rational best = vals.front();
    for (const Rational& v : vals)
        if (v > best) best = v;
    return best;
}

Rational oracle_backward_induction(const PayoffCurve& payoff, const TinyTree& tree) {
    check_tree(tree);
    const int d = tree.depth;
    // levels reachable after k steps are -k + 2j, j = 0..k
    std::vector<Rational> v;
    for (int j = 0; j <= d; ++j) v.push_back(tree_payoff(payoff, tree, -d + 2 * j));
    const Rational half(1, 2);
    for (int k = d; k-- > 0;) {
        std::vector<Rational> next;
        for (int j = 0; j <= k; ++j) {
            const Rational g = tree_payoff(payoff, tree, -k + 2 * j);
            const Rational cont = half * (v[std::size_t(j)] + v[std::size_t(j) + 1]);
            next.push_back(cont > g ? cont : g);
        }
        v.swap(next);
    }
    return v.front();
}

}  // namespace rost
