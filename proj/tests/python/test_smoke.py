import math

import pytest

import rostbar


@pytest.fixture(scope="module")
def two_point():
    nu = rostbar.Measure(atoms=[(0.0, 1.0)])
    mu = rostbar.Measure(atoms=[(-1.0, 0.5), (1.0, 0.5)])
    return nu, mu


def test_measure_cdf_and_quantile(two_point):
    _, mu = two_point
    assert mu.cdf(1.0) == pytest.approx(1.0)
    assert mu.cdf_left(1.0) == pytest.approx(0.5)
    assert mu.quantile(0.3) == -1.0
    uni = rostbar.Measure(pieces=[(-1.0, 1.0, 0.5)])
    assert uni.quantile(0.25) == pytest.approx(-0.5)


def test_validation(two_point):
    nu, mu = two_point
    rep = rostbar.validate(nu, mu)
    assert rep["d1_ok"] and rep["d2_ok"] and rep["connected_ok"]
    bad_nu = rostbar.Measure(atoms=[(-1.0, 0.5), (1.0, 0.5)])
    bad_mu = rostbar.Measure(pieces=[(-0.5, 0.5, 1.0)])
    rep = rostbar.validate(bad_nu, bad_mu)
    assert not rep["connected_ok"]


def test_support_summary(two_point):
    nu, mu = two_point
    s = rostbar.support_summary(nu, mu)
    assert s["bhat_plus"] == pytest.approx(1.0)
    one_sided = rostbar.Measure(pieces=[(1.0, 2.0, 1.0)])
    s = rostbar.support_summary(nu, one_sided)
    assert math.isinf(s["bhat_minus"])


def test_payoff_and_oracle(two_point):
    nu, mu = two_point
    g = rostbar.Payoff(nu, mu)
    assert g(0.5) == pytest.approx(0.5)
    assert g(3.0) == pytest.approx(1.0)
    assert g.deriv_right(0.0) == pytest.approx(1.0)
    assert g.deriv_left(0.0) == pytest.approx(-1.0)
    # depth-1 tree: waiting one step beats stopping at the kink
    assert rostbar.oracle_value(g, 1, 1.0, 0.0) == pytest.approx(1.0)


def test_solve_and_embed(two_point):
    nu, mu = two_point
    sol = rostbar.solve(nu, mu, horizon=1.0, dx=0.02)
    assert max(abs(b - 1.0) for b in sol.b_plus) <= 0.04
    assert sol.phi(0.5) == 0.0
    assert math.isinf(sol.phi(1.5))
    assert 0.70 < sol.value_at_start < 0.80
    rep = sol.embed(n_paths=4000, dt_sim=2e-3, t_max=8.0, seed=11)
    assert rep["absorbed_fraction"] >= 0.98
    assert abs(rep["atom_frequencies"][1.0] - 0.5) < 0.05
    assert rep["ks_distance"] < 0.08
