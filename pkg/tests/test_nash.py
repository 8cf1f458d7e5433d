import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mtdgame import (Equilibrium, EquilibriumReport, MaxItersExceeded, NoEquilibriumFound,
                     br_iteration, find_equilibria, verify_epsilon_ne)
from mtdgame.analysis import theorem2_certificate
from mtdgame.payoff import payoff_arrays
from mtdgame.response import INTERIOR, LOWER, UPPER

import oracles
from helpers import make_game

REF = dict(T=1.5, lambda_max=5, C_d=0.3, C_a=0.5)


def _interior_oracle(C_a, C_d):
    lam = oracles.mp.mpf(C_d) / C_a
    tau = oracles.root(lambda t: oracles.mp.mpf(C_d) * lam - 1 + (1 + lam * t) * oracles.mp.exp(-lam * t),
                       0.01, 50)
    return float(tau), float(lam)


def test_reference_equilibrium():
    rep = find_equilibria(make_game(**REF))
    assert len(rep.equilibria) == 1
    e = rep.equilibria[0]
    assert e.interior
    t, l = _interior_oracle(0.5, 0.3)
    assert e.tau_d_star == pytest.approx(t, abs=1e-9)
    assert e.lambda_a_star == pytest.approx(l, abs=1e-9)
    assert abs(e.tau_d_star - 1.27) <= 0.02 and abs(e.lambda_a_star - 0.61) <= 0.02
    assert rep.certificate.holds


def test_zero_cost_equilibrium():
    rep = find_equilibria(make_game(T=4, lambda_max=5, C_a=0, C_d=0))
    assert [(e.tau_d_star, e.lambda_a_star) for e in rep.equilibria] == [(0.01, 5.0)]
    assert (rep.equilibria[0].kind_d, rep.equilibria[0].kind_a) == (LOWER, UPPER)


def test_expensive_defense_corner():
    rep = find_equilibria(make_game(C_d=3, C_a=0))
    assert [(e.tau_d_star, e.lambda_a_star) for e in rep.equilibria] == [(3.0, 3.0)]
    e = rep.equilibria[0]
    assert e.u_d == pytest.approx(-1.8889, abs=1e-4) and e.u_a == pytest.approx(0.8889, abs=1e-4)


def test_verify_examples():
    g = make_game(**REF)
    e = find_equilibria(g).equilibria[0]
    assert verify_epsilon_ne(g, e.tau_d_star, e.lambda_a_star, 1e-4).is_ne
    # the two-decimal rounding of that point is only a 2e-4 equilibrium
    assert verify_epsilon_ne(g, 1.27, 0.61, 2e-4).is_ne
    z = make_game(T=4, lambda_max=5, C_a=0, C_d=0)
    chk = verify_epsilon_ne(z, 4, 5)
    assert not chk.is_ne and chk.max_gain_d > 0
    chk = verify_epsilon_ne(z, 0.01, 0.01)
    assert not chk.is_ne and chk.max_gain_a > 0


@settings(max_examples=25, deadline=None)
@given(st.floats(0.5, 4), st.floats(1, 5), st.floats(0, 1.5), st.floats(0, 1.5))
def test_every_equilibrium_verified(T, lmax, ca, cd):
    g = make_game(T=T, lambda_max=lmax, C_a=ca, C_d=cd)
    rep = find_equilibria(g, n_deviations=512)
    for e in rep.equilibria:
        eps = 1e-6 * max(1, abs(e.u_a), abs(e.u_d))
        assert verify_epsilon_ne(g, e.tau_d_star, e.lambda_a_star, eps).is_ne
        if e.interior and ca > 0:
            assert abs(e.lambda_a_star - cd / ca) <= 1e-6
    if theorem2_certificate(g).holds:
        assert rep.equilibria


def test_require_raises():
    # attacker wants an interior rate that the defender's corner reply never supports;
    # force failure by an impossible epsilon
    g = make_game(**REF)
    with pytest.raises(NoEquilibriumFound):
        find_equilibria(g, epsilon=-1.0, require=True)
    assert find_equilibria(g, epsilon=-1.0).equilibria == []


def test_br_iteration_examples():
    z = make_game(T=4, lambda_max=5, C_a=0, C_d=0)
    res = br_iteration(z, (2.0, 1.0))
    assert res.fixed_point == (0.01, 5.0) and len(res.trajectory) <= 3
    g = make_game(**REF)
    res = br_iteration(g, (1.0, 1.0), damping=0.5)
    e = find_equilibria(g).equilibria[0]
    assert res.converged and res.check.is_ne
    assert abs(res.fixed_point[0] - e.tau_d_star) < 1e-4
    assert abs(res.fixed_point[1] - e.lambda_a_star) < 1e-4


def test_br_iteration_limit():
    g = make_game(**REF)
    with pytest.raises(MaxItersExceeded) as ei:
        br_iteration(g, (1.0, 1.0), damping=0.01, max_iters=5)
    assert len(ei.value.trajectory) == 6
    with pytest.raises(ValueError):
        br_iteration(g, (1.0, 1.0), damping=0)


def test_report_round_trip():
    rep = find_equilibria(make_game(**REF))
    back = EquilibriumReport.from_dict(rep.to_dict())
    assert back.to_dict() == rep.to_dict()
    assert back.equilibria[0] == rep.equilibria[0]
