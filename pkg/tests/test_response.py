import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import optimize

from mtdgame import (BestResponse, ReactionCurve, attacker_best_response, best_response,
                     defender_best_response, reaction_curve)
from mtdgame.analysis import attacker_cost_threshold, defender_cost_threshold
from mtdgame.payoff import payoff_arrays
from mtdgame.response import (ATTACKER, DEFENDER, INTERIOR, LOWER, UPPER, attacker_marginal,
                              attacker_stationarity, defender_marginal, defender_stationarity)

import oracles
from helpers import make_game


def _mp_da(t, l, ca, alpha=1, n=1):
    return float(oracles.d_lambda(lambda a, b: oracles.u_a(a, b, ca, alpha, n), t, l))


def _mp_dd(t, l, cd, alpha=1, n=1):
    return float(oracles.d_tau(lambda a, b: oracles.u_d(a, b, cd, alpha, n), t, l))


def test_attacker_marginal_examples():
    assert attacker_marginal(make_game(C_a=0), 1, 1) == pytest.approx(0.26424, abs=1e-5)
    assert attacker_marginal(make_game(C_a=0.3), 1, 1) == pytest.approx(-0.03576, abs=1e-5)
    m = attacker_marginal(make_game(C_a=0.2), 1.5, 2)
    assert abs(m) < 2e-4


def test_defender_marginal_examples():
    g = make_game(C_d=0.3)
    assert defender_marginal(g, 1, 1) == pytest.approx(0.03576, abs=1e-5)
    root = float(oracles.mp.findroot(lambda t: (1 + t) * oracles.mp.exp(-t) - 0.7, 1.1))
    assert abs(defender_marginal(g, root, 1)) < 1e-12
    assert root == pytest.approx(1.10, abs=0.01)
    g0 = make_game(C_d=0)
    assert all(defender_marginal(g0, t, l) < 0 for t in (0.1, 1, 3) for l in (0.1, 1, 3))


@settings(max_examples=150, deadline=None)
@given(st.floats(0.05, 3), st.floats(0.05, 3), st.floats(0, 2), st.floats(0.2, 3))
def test_marginals_match_oracle(t, l, c, alpha):
    g = make_game(alpha=alpha, C_a=c, C_d=c)
    a, d = _mp_da(t, l, c, alpha), _mp_dd(t, l, c, alpha)
    assert abs(attacker_marginal(g, t, l) - a) <= 1e-6 * max(1, abs(a))
    assert abs(defender_marginal(g, t, l) - d) <= 1e-6 * max(1, abs(d))


@pytest.mark.parametrize("n", [2, 3])
def test_nonlinear_marginals_match_oracle(n):
    g = make_game(exponent=n, C_a=0.2, C_d=0.3)
    for t, l in [(0.5, 0.4), (1.7, 2.2), (2.9, 0.9)]:
        assert attacker_marginal(g, t, l) == pytest.approx(_mp_da(t, l, 0.2, 1, n), rel=1e-7, abs=1e-9)
        assert defender_marginal(g, t, l) == pytest.approx(_mp_dd(t, l, 0.3, 1, n), rel=1e-7, abs=1e-9)


def test_small_lambda_marginal_limit():
    g = make_game(lambda_min=0, C_a=0.2)
    t = 1.4
    assert attacker_marginal(g, t, 0.0) == pytest.approx(t / 2 - 0.2 / t, abs=1e-15)
    assert attacker_marginal(g, t, 1e-7) == pytest.approx(_mp_da(t, 1e-7, 0.2), abs=1e-9)


def test_attacker_br_examples():
    g = make_game(T=4, lambda_max=5, C_a=0.01)
    br = attacker_best_response(g, 2.0)
    assert br.kind == UPPER and br.action == 5
    g = make_game(T=4, lambda_min=1, lambda_max=3, C_a=4)
    assert all(attacker_best_response(g, t).kind == LOWER for t in np.linspace(0.01, 4, 50))
    g = make_game(T=3.5, lambda_max=3, C_a=0.2)
    br = attacker_best_response(g, 1.5)
    grid = np.linspace(0.01, 3, 10 ** 5)
    oracle = grid[np.argmax(payoff_arrays(g, 1.5, grid)[0])]
    assert br.kind == INTERIOR and abs(br.action - oracle) < 5e-3
    assert br.action == pytest.approx(2.0, abs=5e-3)
    assert abs(br.residual) < 1e-9


def test_defender_br_examples():
    g = make_game(C_d=1.5)
    assert all(defender_best_response(g, l).kind == UPPER for l in np.linspace(0.01, 3, 50))
    # cheap migration: optimum near the fastest rate, exactly tau_min once C_d = 0
    g = make_game(C_d=0.03)
    for l in (1, 2.5):
        br = defender_best_response(g, l)
        x = br.action * l
        assert br.action < 0.3
        assert -math.expm1(-x) - x * math.exp(-x) == pytest.approx(0.03 * l, abs=1e-12)
        br = defender_best_response(g.with_costs(C_d=0), l)
        assert br.kind == LOWER and br.action == 0.01
    g = make_game(T=4, lambda_max=5, C_d=0.3)
    br = defender_best_response(g, 1)
    f = lambda t: (1 + t) * math.exp(-t) - 0.7
    assert br.kind == INTERIOR
    assert br.action == pytest.approx(optimize.bisect(f, 0.5, 2, xtol=1e-14), abs=1e-10)


def test_defender_br_back_off():
    br = defender_best_response(make_game(lambda_min=0), 0)
    assert br.kind == UPPER and br.action == 3


def test_best_response_dispatch():
    g = make_game()
    assert best_response(g, ATTACKER, 1.0) == attacker_best_response(g, 1.0)
    assert best_response(g, DEFENDER, 1.0) == defender_best_response(g, 1.0)
    with pytest.raises(ValueError):
        best_response(g, "referee", 1.0)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 3), st.floats(0, 2), st.floats(0, 2))
def test_argmax_property(x, ca, cd):
    g = make_game(C_a=ca, C_d=cd)
    grid = np.linspace(0.01, 3, 1000)
    br = attacker_best_response(g, x)
    best = payoff_arrays(g, x, br.action)[0]
    assert np.all(payoff_arrays(g, x, grid)[0] <= best + 1e-9)
    br = defender_best_response(g, x)
    best = payoff_arrays(g, br.action, x)[1]
    assert np.all(payoff_arrays(g, grid, x)[1] <= best + 1e-9)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 3), st.floats(0.01, 1.5), st.floats(0.01, 1.5))
def test_interior_sign_conditions(x, ca, cd):
    g = make_game(C_a=ca, C_d=cd)
    br = attacker_best_response(g, x)
    if br.kind == INTERIOR and 0.01 + 1e-3 < br.action < 3 - 1e-3:
        assert attacker_stationarity(g, x, br.action - 1e-3) > 0
        assert attacker_stationarity(g, x, br.action + 1e-3) < 0
    br = defender_best_response(g, x)
    if br.kind == INTERIOR and 0.01 + 1e-3 < br.action < 3 - 1e-3:
        assert defender_stationarity(g, br.action - 1e-3, x) > 0
        assert defender_stationarity(g, br.action + 1e-3, x) < 0


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 3), st.floats(0, 3), st.floats(0, 3))
def test_thresholds_force_boundary(x, ca, cd):
    g = make_game(lambda_min=0.5, C_a=ca, C_d=cd)
    if attacker_cost_threshold(g, x).satisfied:
        assert attacker_best_response(g, x).kind == LOWER
    lam = min(max(x, 0.5), 3)
    if defender_cost_threshold(g, lam).satisfied:
        assert defender_best_response(g, lam).kind == UPPER


def test_polynomial_oracle_self_check():
    for n in (1, 2, 3):
        assert oracles.poly_reward_integral(1.3, 0.7, 1, n) == pytest.approx(
            oracles.reward_integral(1.3, 0.7, 1, n), abs=1e-30)


@pytest.mark.parametrize("n", [2, 3])
def test_nonlinear_br_matches_grid_argmax(n):
    g = make_game(exponent=n, C_a=0.3, C_d=0.4)
    grid = np.linspace(0.01, 3, 6001)
    for x in (0.3, 1.0, 2.2, 3.0):
        ua = [oracles.poly_payoffs(x, l, 0.3, 0.4, 1, n)[0] for l in grid]
        ud = [oracles.poly_payoffs(t, x, 0.3, 0.4, 1, n)[1] for t in grid]
        assert abs(attacker_best_response(g, x).action - grid[np.argmax(ua)]) < 1e-3
        assert abs(defender_best_response(g, x).action - grid[np.argmax(ud)]) < 1e-3


def test_reaction_curves_zero_cost():
    g = make_game(T=4, lambda_max=5, C_a=0, C_d=0)
    a = reaction_curve(g, ATTACKER, 32)
    d = reaction_curve(g, DEFENDER, 32)
    assert np.all(a.actions() == 5) and np.all(d.actions() == 0.01)
    assert a.segments == [(UPPER, 0.01, 4.0)]
    assert ReactionCurve.from_dict(a.to_dict()).to_dict() == a.to_dict()
    assert BestResponse.from_dict(a.points[3].to_dict()) == a.points[3]
