"""Existence certificates, concavity checks and cost thresholds.

Everything here is numeric evidence on grids, not proof.  The closed-form
pieces assume a linear reward (any alpha) and exponential collocation; the
``general_*`` functions work for any reward/collocation pair.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ._numeric import exp_tail
from .errors import OutOfDomain, RequiresZeroLambdaMin, WrongInstantiation
from .model import Game
from .payoff import SERIES_LAMBDA, _quad, reward_integral

DEFAULT_GRID = (64, 64)
REFINE_ROUNDS = 40


def _require_closed_form(game, what):
    if not game.is_linear_exponential:
        raise WrongInstantiation(f"{what} needs a linear reward with exponential collocation")


# ------------------------------------------------------ second derivatives

def attacker_second_derivative(game: Game, tau_d, lambda_a):
    """d2 u_a / d lambda_a^2.

    Equal to ``e^-x (x^2 + 2x + 2 - 2e^x) / (lambda^3 tau)`` written through the
    cubic exponential tail so that it stays accurate for small x = lambda*tau.
    """
    _require_closed_form(game, "attacker_second_derivative")
    lam = np.asarray(lambda_a, float)
    tau = np.asarray(tau_d, float)
    if np.any(lam <= 0) or np.any(tau <= 0):
        raise OutOfDomain("second derivatives need lambda_a > 0 and tau_d > 0")
    x = lam * tau
    out = -2 * game.alpha * np.exp(-x) * exp_tail(x, 3) / (lam ** 3 * tau)
    return float(out) if np.ndim(out) == 0 else out


def defender_second_derivative(game: Game, tau_d, lambda_a):
    """d2 u_d / d tau_d^2.

    Algebraically the same as
    ``2(1 - x - e^-x - lambda C_d)/(lambda tau^3) + 2(1 - e^-x)/tau^2 - lambda e^-x / tau``;
    collapsing it gives ``(2/tau^3) (alpha e^-x tail3(x) / lambda - C_d)``.
    """
    _require_closed_form(game, "defender_second_derivative")
    lam = np.asarray(lambda_a, float)
    tau = np.asarray(tau_d, float)
    if np.any(lam <= 0) or np.any(tau <= 0):
        raise OutOfDomain("second derivatives need lambda_a > 0 and tau_d > 0")
    x = lam * tau
    out = 2.0 / tau ** 3 * (game.alpha * np.exp(-x) * exp_tail(x, 3) / lam - game.C_d)
    return float(out) if np.ndim(out) == 0 else out


# ------------------------------------------------------ existence region

@dataclass(frozen=True)
class ExistenceCertificate:
    holds: bool
    worst_point: tuple
    worst_margin: float
    grid_resolution: tuple

    def to_dict(self):
        d = asdict(self)
        d["worst_point"] = list(self.worst_point)
        d["grid_resolution"] = list(self.grid_resolution)
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(bool(d["holds"]), tuple(d["worst_point"]), float(d["worst_margin"]),
                   tuple(d["grid_resolution"]))


def existence_margin(game: Game, tau_d, lambda_a):
    """``(1 + x + x^2/2) e^-x - (1 - lambda C_d / alpha)``; positive means the
    sufficient condition for a pure equilibrium holds at that point."""
    _require_closed_form(game, "existence_margin")
    lam = np.asarray(lambda_a, float)
    x = lam * np.asarray(tau_d, float)
    return lam * game.C_d / game.alpha - np.exp(-x) * exp_tail(x, 3)


def margin_grid(game: Game, n_tau: int, n_lambda: int):
    taus = np.linspace(game.tau_min, game.T, n_tau)
    lams = np.linspace(game.lambda_min, game.lambda_max, n_lambda)
    return taus, lams, existence_margin(game, taus[:, None], lams[None, :])


def theorem2_certificate(game: Game, grid=DEFAULT_GRID) -> ExistenceCertificate:
    n_tau, n_lam = grid
    taus, lams, M = margin_grid(game, n_tau, n_lam)
    i, j = np.unravel_index(np.argmin(M), M.shape)
    best = (float(M[i, j]), float(taus[i]), float(lams[j]))
    # zoom into the neighbourhood of the worst grid cell
    dt = (taus[1] - taus[0]) if n_tau > 1 else 0.0
    dl = (lams[1] - lams[0]) if n_lam > 1 else 0.0
    t0, l0 = best[1], best[2]
    for _ in range(REFINE_ROUNDS):
        ts = np.clip(np.linspace(t0 - dt, t0 + dt, 5), game.tau_min, game.T)
        ls = np.clip(np.linspace(l0 - dl, l0 + dl, 5), game.lambda_min, game.lambda_max)
        sub = existence_margin(game, ts[:, None], ls[None, :])
        a, b = np.unravel_index(np.argmin(sub), sub.shape)
        if sub[a, b] < best[0]:
            best = (float(sub[a, b]), float(ts[a]), float(ls[b]))
        t0, l0 = float(ts[a]), float(ls[b])
        dt, dl = dt / 2, dl / 2
    # strict inequality: a zero margin does not certify anything
    return ExistenceCertificate(best[0] > 0, (best[1], best[2]), best[0], (n_tau, n_lam))


def corollary_check(game: Game) -> dict:
    """Closed-interval shortcuts to the existence condition.

    cor1: every attack rate is at least alpha/C_d.
    cor2: T <= 5 C_d / alpha.
    """
    if game.C_d <= 0:
        return {"cor1": False, "cor2": False}
    c = game.C_d / game.alpha
    return {"cor1": bool(game.lambda_min >= 1.0 / c), "cor2": bool(game.T <= 5.0 * c)}


# ------------------------------------------------------ general concavity

@dataclass
class ConcavityReport:
    f_concave_in_lambda: bool
    G_over_tau_convex: bool
    existence_guaranteed: bool
    f_concave_fraction: float
    G_over_tau_convex_fraction: float
    # per-point flags; rows follow the first grid axis
    f_pointwise: np.ndarray = None
    G_pointwise: np.ndarray = None

    def to_dict(self):
        d = {k: v for k, v in asdict(self).items() if not k.endswith("pointwise")}
        d["f_pointwise"] = None if self.f_pointwise is None else self.f_pointwise.tolist()
        d["G_pointwise"] = None if self.G_pointwise is None else self.G_pointwise.tolist()
        return d


def general_concavity_report(game: Game, grid=DEFAULT_GRID) -> ConcavityReport:
    """Second-difference tests of the two structural conditions for existence:
    f_a strictly concave in lambda_a, and G/tau_d convex in tau_d.
    Results are pointwise; the flags are the conjunctions."""
    n1, n2 = grid
    h = 1e-4
    s = np.linspace(0.0, game.T, n1)
    lams = np.linspace(max(game.lambda_min, 2 * h * max(1.0, game.lambda_max)), game.lambda_max, n2)
    hl = h * np.maximum(1.0, lams)
    f = game.collocation.pdf
    d2f = (f(s[:, None], lams + hl) - 2 * f(s[:, None], lams) + f(s[:, None], lams - hl)) / hl ** 2
    f_ok = d2f < 0

    taus = np.linspace(game.tau_min, game.T, n2)
    ht = h * np.maximum(1.0, taus)
    # keep the stencil inside tau_d > 0
    ht = np.minimum(ht, 0.5 * taus)
    g = lambda td: game.reward.value(td, s[:, None]) / td
    d2g = (g(taus + ht) - 2 * g(taus) + g(taus - ht)) / ht ** 2
    scale = max(1.0, float(np.abs(g(taus)).max()))
    g_ok = d2g >= -1e-6 * scale

    fc, gc = bool(f_ok.all()), bool(g_ok.all())
    return ConcavityReport(fc, gc, fc and gc, float(f_ok.mean()), float(g_ok.mean()), f_ok, g_ok)


# ------------------------------------------------------ cost thresholds

ATTACKER_MIN_RATE = "attacker_min_rate"
DEFENDER_NO_MIGRATE = "defender_no_migrate"
GENERAL_ATTACKER = "general_attacker"
GENERAL_DEFENDER = "general_defender"
BACKOFF = "backoff"


@dataclass(frozen=True)
class ThresholdReport:
    kind: str
    threshold: float
    satisfied: bool
    applicable: bool = True

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def _one_minus_1px_emx(x):
    # 1 - (1 + x) e^-x
    return np.exp(-x) * exp_tail(x, 2)


def attacker_cost_threshold(game: Game, tau_d: float) -> ThresholdReport:
    """Attack cost above which the best response to tau_d is lambda_min."""
    if tau_d < 0:
        raise OutOfDomain(f"tau_d={tau_d} < 0")
    applicable = game.is_linear_exponential
    alpha = game.alpha or 1.0
    if game.lambda_min <= 0:
        return ThresholdReport(ATTACKER_MIN_RATE, float("inf"), False, applicable)
    thr = alpha * float(_one_minus_1px_emx(game.lambda_max * tau_d)) / game.lambda_min ** 2
    return ThresholdReport(ATTACKER_MIN_RATE, thr, bool(game.C_a > thr), applicable)


def defender_cost_threshold(game: Game, lambda_a: float) -> ThresholdReport:
    """Migration cost above which the best response to lambda_a is T."""
    if lambda_a < 0:
        raise OutOfDomain(f"lambda_a={lambda_a} < 0")
    applicable = game.is_linear_exponential
    alpha = game.alpha or 1.0
    if lambda_a < SERIES_LAMBDA:
        thr = alpha * lambda_a * game.T ** 2 / 2
    else:
        thr = alpha * float(_one_minus_1px_emx(lambda_a * game.T)) / lambda_a
    return ThresholdReport(DEFENDER_NO_MIGRATE, thr, bool(game.C_d > thr), applicable)


def general_monotonicity_thresholds(game: Game, tau_d: float, lambda_a: float):
    """(attacker, defender) thresholds valid for any reward/collocation pair.

    attacker: ``int_0^tau_d G(tau_d, s) df/dlambda(s; lambda_min) ds``
    defender: ``T^2 E[d/dtau (G/tau)|_T] = int_0^T (T dG/dtau - G) f(s; lambda_a) ds``
    """
    G, dG = game.reward.value, game.reward.d_dtau_d
    f, df = game.collocation.pdf, game.collocation.pdf_dlambda
    lmin, T = game.lambda_min, game.T
    a_thr = _quad(lambda s: float(G(tau_d, s) * df(s, lmin)), 0.0, tau_d) if tau_d > 0 else 0.0
    if lambda_a > 0:
        d_thr = _quad(lambda s: float((T * dG(T, s) - G(T, s)) * f(s, lambda_a)), 0.0, T)
        d_thr += T * float(G(T, T)) * float(f(T, lambda_a))
    else:
        d_thr = 0.0
    return (ThresholdReport(GENERAL_ATTACKER, a_thr, bool(game.C_a > a_thr)),
            ThresholdReport(GENERAL_DEFENDER, d_thr, bool(game.C_d > d_thr)))


@dataclass(frozen=True)
class BackoffReport:
    is_equilibrium: bool
    worst_lambda: float
    margin: float
    equilibrium: tuple | None = None

    def to_dict(self):
        d = asdict(self)
        d["equilibrium"] = None if self.equilibrium is None else list(self.equilibrium)
        return d


def backoff_equilibrium_check(game: Game, n_lambda: int = 256) -> BackoffReport:
    """Is (tau_d = T, lambda_a = 0) an equilibrium?

    Checks ``lambda C_a - E_lambda[G(T - tau_a)] >= 0`` on a grid over (0, lambda_max].
    """
    if game.lambda_min != 0:
        raise RequiresZeroLambdaMin(f"lambda_min must be 0, got {game.lambda_min}")
    lams = np.linspace(game.lambda_max / n_lambda, game.lambda_max, n_lambda)
    margins = lams * game.C_a - reward_integral(game, game.T, lams)
    k = int(np.argmin(margins))
    ok = bool(margins[k] >= 0)
    return BackoffReport(ok, float(lams[k]), float(margins[k]), (game.T, 0.0) if ok else None)
