"""Pure-strategy equilibria as intersections of the two reaction curves."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import optimize

from .analysis import ExistenceCertificate, theorem2_certificate
from .errors import MaxItersExceeded, NoEquilibriumFound
from .model import Game
from .payoff import check_point, payoff_arrays
from .response import (INTERIOR, attacker_best_response, attacker_marginal,
                       attacker_stationarity, defender_best_response,
                       defender_marginal, defender_stationarity)

N_DEVIATIONS = 2048
DEFAULT_EPS = 1e-6
DEDUP_TOL = 1e-6


@dataclass(frozen=True)
class EpsilonCheck:
    is_ne: bool
    max_gain_d: float
    max_gain_a: float


def verify_epsilon_ne(game: Game, tau_d: float, lambda_a: float,
                      epsilon: float = DEFAULT_EPS, n_deviations: int = N_DEVIATIONS) -> EpsilonCheck:
    """Scan unilateral deviations of each player; both gains must stay <= epsilon."""
    check_point(game, tau_d, lambda_a)
    taus = np.append(np.linspace(game.tau_min, game.T, n_deviations),
                     defender_best_response(game, lambda_a).action)
    lams = np.append(np.linspace(game.lambda_min, game.lambda_max, n_deviations),
                     attacker_best_response(game, tau_d).action)
    ua0, ud0 = (float(v) for v in payoff_arrays(game, tau_d, lambda_a))
    gain_d = float(np.max(payoff_arrays(game, taus, lambda_a)[1]) - ud0)
    gain_a = float(np.max(payoff_arrays(game, tau_d, lams)[0]) - ua0)
    return EpsilonCheck(gain_d <= epsilon and gain_a <= epsilon, gain_d, gain_a)


@dataclass(frozen=True)
class Equilibrium:
    tau_d_star: float
    lambda_a_star: float
    kind_d: str
    kind_a: str
    epsilon: float
    residuals: tuple
    u_d: float
    u_a: float

    @property
    def interior(self):
        return self.kind_d == INTERIOR and self.kind_a == INTERIOR

    def to_dict(self):
        d = asdict(self)
        d["residuals"] = list(self.residuals)
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["residuals"] = tuple(d["residuals"])
        return cls(**d)


@dataclass
class EquilibriumReport:
    equilibria: list = field(default_factory=list)
    certificate: ExistenceCertificate | None = None
    method: str = "curve_intersection"

    def to_dict(self):
        return {"method": self.method,
                "equilibria": [e.to_dict() for e in self.equilibria],
                "certificate": None if self.certificate is None else self.certificate.to_dict()}

    @classmethod
    def from_dict(cls, d):
        cert = d.get("certificate")
        return cls([Equilibrium.from_dict(e) for e in d["equilibria"]],
                   None if cert is None else ExistenceCertificate.from_dict(cert),
                   d.get("method", "curve_intersection"))


def _residuals(game, tau, lam, kind_d, kind_a):
    if game.is_linear_exponential:
        rd = float(defender_stationarity(game, tau, lam)) if kind_d == INTERIOR else defender_marginal(game, tau, lam)
        ra = float(attacker_stationarity(game, tau, lam)) if kind_a == INTERIOR else attacker_marginal(game, tau, lam)
        return float(rd), float(ra)
    return float(defender_marginal(game, tau, lam)), float(attacker_marginal(game, tau, lam))


def _make_equilibrium(game, tau, lam, epsilon, n_deviations):
    ua, ud = (float(v) for v in payoff_arrays(game, tau, lam))
    eps = epsilon if epsilon is not None else DEFAULT_EPS * max(1.0, abs(ua), abs(ud))
    chk = verify_epsilon_ne(game, tau, lam, eps, n_deviations)
    if not chk.is_ne:
        return None
    kd = defender_best_response(game, lam).kind
    ka = attacker_best_response(game, tau).kind
    return Equilibrium(float(tau), float(lam), kd, ka, max(chk.max_gain_d, chk.max_gain_a),
                       _residuals(game, tau, lam, kd, ka), ud, ua)


def find_equilibria(game: Game, n_grid: int = 64, epsilon: float | None = None,
                    n_deviations: int = N_DEVIATIONS, require: bool = False) -> EquilibriumReport:
    """All pure equilibria found along the composed reaction map.

    The fixed-point residual ``r(l) = BR_a(BR_d(l)) - l`` is sampled on
    ``n_grid`` attack rates; every sign change is refined by bracketed root
    finding, and the four action-space corners are tried as well.  Each
    candidate must pass :func:`verify_epsilon_ne`.
    """
    lo, hi = game.lambda_interval

    def resid(l):
        return attacker_best_response(game, defender_best_response(game, l).action).action - l

    grid = np.linspace(lo, hi, n_grid)
    r = np.array([resid(l) for l in grid])
    lams = []
    for i in range(n_grid):
        if abs(r[i]) <= 1e-12:
            lams.append(grid[i])
        elif i + 1 < n_grid and r[i] * r[i + 1] < 0 and abs(r[i + 1]) > 1e-12:
            lams.append(optimize.brentq(resid, grid[i], grid[i + 1], xtol=1e-14,
                                        rtol=4 * np.finfo(float).eps, maxiter=200))
    points = [(defender_best_response(game, l).action, l) for l in lams]
    points += [(t, l) for t in game.tau_interval for l in game.lambda_interval]

    found = []
    for tau, lam in points:
        if any(abs(tau - e.tau_d_star) <= DEDUP_TOL and abs(lam - e.lambda_a_star) <= DEDUP_TOL
               for e in found):
            continue
        eq = _make_equilibrium(game, tau, lam, epsilon, n_deviations)
        if eq is not None:
            found.append(eq)
    found.sort(key=lambda e: (e.lambda_a_star, e.tau_d_star))

    cert = theorem2_certificate(game) if game.is_linear_exponential else None
    if require and not found:
        raise NoEquilibriumFound("no verified pure equilibrium on the sampled reaction curves")
    return EquilibriumReport(found, cert, "curve_intersection")


@dataclass
class BRIterationResult:
    trajectory: list
    fixed_point: tuple
    converged: bool
    check: EpsilonCheck | None = None


def br_iteration(game: Game, start, damping: float = 1.0, max_iters: int = 1000,
                 tol: float = 1e-10) -> BRIterationResult:
    """Damped simultaneous best-response updates from ``start = (tau_d, lambda_a)``."""
    if not 0 < damping <= 1:
        raise ValueError("damping must lie in (0, 1]")
    tau, lam = map(float, start)
    check_point(game, tau, lam)
    traj = [(tau, lam)]
    for _ in range(max_iters):
        t_br = defender_best_response(game, lam).action
        l_br = attacker_best_response(game, tau).action
        nt = (1 - damping) * tau + damping * t_br
        nl = (1 - damping) * lam + damping * l_br
        step = max(abs(nt - tau), abs(nl - lam))
        tau, lam = nt, nl
        traj.append((tau, lam))
        if step < tol:
            ua, ud = payoff_arrays(game, tau, lam)
            eps = DEFAULT_EPS * max(1.0, abs(float(ua)), abs(float(ud)))
            return BRIterationResult(traj, (tau, lam), True, verify_epsilon_ne(game, tau, lam, eps))
    raise MaxItersExceeded(f"best-response iteration did not settle in {max_iters} steps "
                           f"(last point {traj[-1]})", traj)
