"""Marginal payoffs, best responses and reaction curves."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import optimize

from ._numeric import exp_tail
from .model import Game
from .payoff import SERIES_LAMBDA, _quad, check_point, payoff_arrays

LOWER, UPPER, INTERIOR = "lower_boundary", "upper_boundary", "interior"
ATTACKER, DEFENDER = "attacker", "defender"

ROOT_XTOL = 1e-14
ROOT_MAXITER = 200
STATIONARITY_TOL = 1e-9
SCAN_POINTS = 512


@dataclass(frozen=True)
class BestResponse:
    player: str
    opponent_action: float
    kind: str
    action: float
    residual: float

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


# --------------------------------------------------------------- marginals

def attacker_stationarity(game: Game, tau_d, lambda_a):
    """Numerator of du_a/dlambda_a: ``alpha*(1 - (1+x)e^-x) - C_a*lambda_a**2``, x = lambda_a*tau_d.

    With alpha = 1 this is exactly the attacker's interior best-response condition.
    """
    x = np.asarray(lambda_a, float) * tau_d
    return game.alpha * np.exp(-x) * exp_tail(x, 2) - game.C_a * np.asarray(lambda_a, float) ** 2


def defender_stationarity(game: Game, tau_d, lambda_a):
    """Numerator of du_d/dtau_d: ``C_d*lambda_a - alpha*(1 - (1+x)e^-x)``."""
    x = lambda_a * np.asarray(tau_d, float)
    return game.C_d * lambda_a - game.alpha * np.exp(-x) * exp_tail(x, 2)


def attacker_marginal(game: Game, tau_d: float, lambda_a: float) -> float:
    """du_a/dlambda_a at (tau_d, lambda_a)."""
    if game.is_linear_exponential:
        a = game.alpha
        if lambda_a < SERIES_LAMBDA:
            return a * tau_d / 2 - game.C_a / tau_d - a * lambda_a * tau_d ** 2 / 3
        return float(attacker_stationarity(game, tau_d, lambda_a)) / (lambda_a ** 2 * tau_d)
    G, df = game.reward.value, game.collocation.pdf_dlambda
    I = _quad(lambda s: float(G(tau_d, s) * df(s, lambda_a)), 0.0, tau_d)
    return (I - game.C_a) / tau_d


def defender_marginal(game: Game, tau_d: float, lambda_a: float) -> float:
    """du_d/dtau_d at (tau_d, lambda_a)."""
    if game.is_linear_exponential:
        if lambda_a < SERIES_LAMBDA:
            return game.C_d / tau_d ** 2 - game.alpha * lambda_a / 2
        return float(defender_stationarity(game, tau_d, lambda_a)) / (lambda_a * tau_d ** 2)
    G, dG, f = game.reward.value, game.reward.d_dtau_d, game.collocation.pdf
    if lambda_a == 0:
        return game.C_d / tau_d ** 2
    I = _quad(lambda s: float((tau_d * dG(tau_d, s) - G(tau_d, s)) * f(s, lambda_a)), 0.0, tau_d)
    # leakage already accrued at the collocation instant, zero for G(0) = 0
    edge = tau_d * float(G(tau_d, tau_d)) * float(f(tau_d, lambda_a))
    return (game.C_d - I - edge) / tau_d ** 2


# ---------------------------------------------------------- best responses

def _three_case(marginal, lo, hi):
    """Boundary/interior classification for a decreasing marginal on [lo, hi]."""
    m_hi = marginal(hi)
    if m_hi >= 0:
        return UPPER, hi
    m_lo = marginal(lo)
    if m_lo <= 0:
        return LOWER, lo
    root = optimize.brentq(marginal, lo, hi, xtol=ROOT_XTOL, rtol=4 * np.finfo(float).eps,
                           maxiter=ROOT_MAXITER)
    return INTERIOR, root


def _scan(utility, marginal, lo, hi, n=SCAN_POINTS):
    """Global maximizer on [lo, hi] without concavity.

    Every interior local maximum is bracketed by a +/- sign change of the
    marginal on an n-point grid and refined by root finding; the boundary
    points are candidates too.  Ties go to the smaller action.
    """
    xs = np.linspace(lo, hi, n)
    m = np.array([marginal(x) for x in xs])
    cands = [(LOWER, lo)]
    for i in range(n - 1):
        if m[i] > 0 >= m[i + 1]:
            if m[i + 1] == 0:
                cands.append((INTERIOR, xs[i + 1]))
            else:
                r = optimize.brentq(marginal, xs[i], xs[i + 1], xtol=ROOT_XTOL,
                                    rtol=4 * np.finfo(float).eps, maxiter=ROOT_MAXITER)
                cands.append((INTERIOR, r))
    cands.append((UPPER, hi))
    vals = [utility(x) for _, x in cands]
    best = max(vals)
    tol = 1e-12 * max(1.0, abs(best))
    for (kind, x), v in zip(cands, vals):
        if v >= best - tol:
            if kind == INTERIOR and (x <= lo or x >= hi):
                kind = LOWER if x <= lo else UPPER
            return kind, x


def attacker_best_response(game: Game, tau_d: float) -> BestResponse:
    check_point(game, tau_d, game.lambda_min)
    lo, hi = game.lambda_interval
    marg = lambda l: attacker_marginal(game, tau_d, l)
    if game.is_linear_exponential:
        # u_a is strictly concave in lambda_a for this pair
        kind, lam = _three_case(marg, lo, hi)
    else:
        kind, lam = _scan(lambda l: float(payoff_arrays(game, tau_d, l)[0]), marg, lo, hi)
    if kind == INTERIOR and game.is_linear_exponential:
        res = float(attacker_stationarity(game, tau_d, lam))
    else:
        res = marg(lam)
    return BestResponse(ATTACKER, float(tau_d), kind, float(lam), float(res))


def defender_best_response(game: Game, lambda_a: float) -> BestResponse:
    check_point(game, game.tau_min, lambda_a)
    lo, hi = game.tau_interval
    if lambda_a == 0:
        # u_d = -C_d / tau_d
        return BestResponse(DEFENDER, 0.0, UPPER, float(hi), game.C_d / hi ** 2)
    marg = lambda t: defender_marginal(game, t, lambda_a)
    if game.is_linear_exponential:
        # the marginal's numerator falls monotonically in tau_d, so u_d is unimodal
        kind, tau = _three_case(marg, lo, hi)
    else:
        kind, tau = _scan(lambda t: float(payoff_arrays(game, t, lambda_a)[1]), marg, lo, hi)
    if kind == INTERIOR and game.is_linear_exponential:
        res = float(defender_stationarity(game, tau, lambda_a))
    else:
        res = marg(tau)
    return BestResponse(DEFENDER, float(lambda_a), kind, float(tau), float(res))


def best_response(game: Game, player: str, opponent_action: float) -> BestResponse:
    if player == ATTACKER:
        return attacker_best_response(game, opponent_action)
    if player == DEFENDER:
        return defender_best_response(game, opponent_action)
    raise ValueError(f"unknown player {player!r}")


# ---------------------------------------------------------- reaction curves

@dataclass
class ReactionCurve:
    player: str
    points: list = field(default_factory=list)
    # runs of identical kind: (kind, first opponent action, last opponent action)
    segments: list = field(default_factory=list)

    def opponent_actions(self):
        return np.array([p.opponent_action for p in self.points])

    def actions(self):
        return np.array([p.action for p in self.points])

    def to_dict(self):
        return {"player": self.player,
                "points": [p.to_dict() for p in self.points],
                "segments": [list(s) for s in self.segments]}

    @classmethod
    def from_dict(cls, d):
        return cls(d["player"], [BestResponse.from_dict(p) for p in d["points"]],
                   [tuple(s) for s in d["segments"]])


def reaction_curve(game: Game, player: str, n_points: int = 64) -> ReactionCurve:
    if n_points < 2:
        raise ValueError("n_points must be >= 2")
    lo, hi = game.tau_interval if player == ATTACKER else game.lambda_interval
    pts = [best_response(game, player, float(x)) for x in np.linspace(lo, hi, n_points)]
    segs = []
    for p in pts:
        if segs and segs[-1][0] == p.kind:
            segs[-1][2] = p.opponent_action
        else:
            segs.append([p.kind, p.opponent_action, p.opponent_action])
    return ReactionCurve(player, pts, [tuple(s) for s in segs])
