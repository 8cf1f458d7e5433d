"""Realized and expected payoffs per unit time for both players.

Closed forms cover a linear reward with exponential collocation times (any
``alpha``); every other pairing goes through adaptive quadrature of the
reward term.  Both routes return the same quantities:

    u_a = (R - lambda_a * C_a) / tau_d
    u_d = (-R - C_d) / tau_d

where ``R = int_0^tau_d G(tau_d, s) f_a(s; lambda_a) ds``.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy import integrate

from ._numeric import exp_tail
from .errors import OutOfDomain, QuadratureNotConverged
from .model import Game

QUAD_EPSABS = 1e-12
QUAD_MAX_ERROR = 1e-10
QUAD_LIMIT = 200
# below this rate the closed forms are 0/0; use the first-order series
SERIES_LAMBDA = 1e-6
_SLACK = 1e-12


@dataclass(frozen=True)
class PayoffPoint:
    tau_d: float
    lambda_a: float
    u_a: float
    u_d: float
    method: str  # "closed_form" | "quadrature"

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def check_point(game: Game, tau_d, lambda_a):
    lo, hi = game.tau_interval
    if not (lo - _SLACK <= tau_d <= hi + _SLACK):
        raise OutOfDomain(f"tau_d={tau_d} outside [{lo}, {hi}]")
    lo, hi = game.lambda_interval
    if not (lo - _SLACK <= lambda_a <= hi + _SLACK):
        raise OutOfDomain(f"lambda_a={lambda_a} outside [{lo}, {hi}]")


# ---------------------------------------------------------------- closed forms

def _closed_forms(tau, lam, alpha, C_a, C_d):
    tau = np.asarray(tau, float)
    lam = np.asarray(lam, float)
    tau, lam = np.broadcast_arrays(tau, lam)
    small = lam < SERIES_LAMBDA
    lam_safe = np.where(small, 1.0, lam)
    x = lam_safe * tau
    core = alpha * exp_tail(-x, 2)  # alpha * (x - 1 + e^-x)
    ua = (core - C_a * lam_safe ** 2) / x
    ud = (-core - C_d * lam_safe) / x
    ua = np.where(small, alpha * lam * tau / 2 - C_a * lam / tau, ua)
    ud = np.where(small, -alpha * lam * tau / 2 - C_d / tau, ud)
    return ua, ud


def _reward_integral_closed(tau, lam, alpha):
    tau = np.asarray(tau, float)
    lam = np.asarray(lam, float)
    small = lam < SERIES_LAMBDA
    lam_safe = np.where(small, 1.0, lam)
    r = alpha * exp_tail(-lam_safe * tau, 2) / lam_safe
    return np.where(small, alpha * lam * tau ** 2 / 2, r)


# ----------------------------------------------------------------- quadrature

def _quad(fn, a, b):
    val, err, *rest = integrate.quad(fn, a, b, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSABS,
                                     limit=QUAD_LIMIT, full_output=1)
    if err > QUAD_MAX_ERROR:
        raise QuadratureNotConverged(f"quadrature on [{a}, {b}] stopped at error {err:.3g}")
    return val


def quadrature_expected_reward(game: Game, tau_d: float, lambda_a: float) -> float:
    """``int_0^tau_d G(tau_d, s) f_a(s; lambda_a) ds`` by adaptive Gauss-Kronrod."""
    if lambda_a < 0 or tau_d < 0:
        raise OutOfDomain(f"need tau_d, lambda_a >= 0 (got {tau_d}, {lambda_a})")
    if lambda_a == 0 or tau_d == 0:
        return 0.0
    G, f = game.reward.value, game.collocation.pdf
    return _quad(lambda s: float(G(tau_d, s) * f(s, lambda_a)), 0.0, tau_d)


def reward_integral(game: Game, tau_d, lambda_a):
    """Expected accumulated reward before migration; vectorized, no domain checks."""
    if game.is_linear_exponential:
        return _reward_integral_closed(tau_d, lambda_a, game.alpha)
    return np.vectorize(lambda t, l: quadrature_expected_reward(game, t, l),
                        otypes=[float])(tau_d, lambda_a)


def payoff_arrays(game: Game, tau_d, lambda_a):
    """(u_a, u_d) evaluated elementwise without domain checks.

    Works on the closed forms when available, otherwise on quadrature.
    Points outside the action intervals are allowed here.
    """
    if game.is_linear_exponential:
        return _closed_forms(tau_d, lambda_a, game.alpha, game.C_a, game.C_d)
    tau_d = np.asarray(tau_d, float)
    lambda_a = np.asarray(lambda_a, float)
    R = reward_integral(game, tau_d, lambda_a)
    return (R - lambda_a * game.C_a) / tau_d, (-R - game.C_d) / tau_d


# ---------------------------------------------------------------- public API

def collocation_probability(game: Game, tau_d: float, lambda_a: float) -> float:
    if not (game.tau_min - _SLACK <= tau_d) or lambda_a < 0:
        raise OutOfDomain(f"tau_d={tau_d}, lambda_a={lambda_a}")
    return float(game.collocation.cdf(tau_d, lambda_a))


def realized_attacker_payoff(game: Game, tau_d, tau_a, lambda_a):
    """Per-unit-time attacker payoff for a realized collocation time (vectorized in tau_a)."""
    check_point(game, tau_d, lambda_a)
    return _realized(game, tau_d, tau_a, lambda_a)[0]


def realized_defender_payoff(game: Game, tau_d, tau_a, lambda_a):
    check_point(game, tau_d, lambda_a)
    return _realized(game, tau_d, tau_a, lambda_a)[1]


def _realized(game, tau_d, tau_a, lambda_a):
    tau_a = np.asarray(tau_a, float)
    hit = tau_a < tau_d
    # tau_a may be +inf (never collocates); keep it away from G
    G = np.where(hit, game.reward.value(tau_d, np.where(hit, tau_a, tau_d)), 0.0)
    ua = (G - lambda_a * game.C_a) / tau_d
    ud = (-G - game.C_d) / tau_d
    if ua.ndim == 0:
        return float(ua), float(ud)
    return ua, ud


def expected_payoffs(game: Game, tau_d: float, lambda_a: float) -> PayoffPoint:
    check_point(game, tau_d, lambda_a)
    ua, ud = payoff_arrays(game, tau_d, lambda_a)
    method = "closed_form" if game.is_linear_exponential else "quadrature"
    return PayoffPoint(float(tau_d), float(lambda_a), float(ua), float(ud), method)


def expected_attacker_payoff(game: Game, tau_d: float, lambda_a: float) -> float:
    return expected_payoffs(game, tau_d, lambda_a).u_a


def expected_defender_payoff(game: Game, tau_d: float, lambda_a: float) -> float:
    return expected_payoffs(game, tau_d, lambda_a).u_d
