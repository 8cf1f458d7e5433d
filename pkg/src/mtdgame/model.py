"""Game instance: action intervals, costs, reward and collocation-time models."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import (BadDistribution, InvalidConfig, InvalidInterval,
                     NegativeCost, NegativeInput, NonMonotoneReward)

DEFAULT_TAU_MIN = 0.01
DEFAULT_LAMBDA_MIN = 0.01
VALIDATION_GRID = 64


# --------------------------------------------------------------------------
# reward models G(tau_d, tau_a)

@dataclass(frozen=True)
class PolynomialReward:
    """Leakage ``alpha * (tau_d - tau_a)**exponent`` once collocated, else 0."""
    exponent: int = 1
    alpha: float = 1.0

    kind = "polynomial"

    def value(self, tau_d, tau_a):
        t = np.maximum(np.asarray(tau_d, float) - np.asarray(tau_a, float), 0.0)
        return self.alpha * t ** self.exponent

    def d_dtau_d(self, tau_d, tau_a):
        t = np.maximum(np.asarray(tau_d, float) - np.asarray(tau_a, float), 0.0)
        if self.exponent == 1:
            return np.where(t > 0, self.alpha, 0.0)
        return self.alpha * self.exponent * t ** (self.exponent - 1)

    def to_dict(self):
        return {"kind": "polynomial", "exponent": self.exponent, "alpha": self.alpha}


@dataclass(frozen=True)
class CustomReward:
    """User-supplied ``G(tau_d, tau_a)``; must be a deterministic pure function.

    ``derivative`` is optional; without it the partial in ``tau_d`` is taken
    by central differences that never straddle the collocation instant.
    """
    func: Callable[[float, float], float]
    derivative: Callable[[float, float], float] | None = None

    kind = "custom"

    def value(self, tau_d, tau_a):
        return np.vectorize(self.func, otypes=[float])(tau_d, tau_a)

    def d_dtau_d(self, tau_d, tau_a):
        if self.derivative is not None:
            return np.vectorize(self.derivative, otypes=[float])(tau_d, tau_a)

        def fd(td, ta):
            t = td - ta
            if t <= 0:
                return 0.0
            h = min(1e-6 * max(1.0, td), 0.5 * t)
            return (self.func(td + h, ta) - self.func(td - h, ta)) / (2 * h)

        return np.vectorize(fd, otypes=[float])(tau_d, tau_a)

    def to_dict(self):
        raise TypeError("custom reward models are not serializable")


# --------------------------------------------------------------------------
# collocation-time models f_a(tau_a; lambda_a)

@dataclass(frozen=True)
class ExponentialCollocation:
    kind = "exponential"

    def pdf(self, tau_a, lam):
        tau_a, lam = np.asarray(tau_a, float), np.asarray(lam, float)
        return np.where(lam > 0, lam * np.exp(-lam * tau_a), 0.0)

    def cdf(self, tau_a, lam):
        tau_a, lam = np.asarray(tau_a, float), np.asarray(lam, float)
        return np.where(lam > 0, -np.expm1(-lam * tau_a), 0.0)

    def pdf_dlambda(self, tau_a, lam):
        tau_a, lam = np.asarray(tau_a, float), np.asarray(lam, float)
        return (1.0 - lam * tau_a) * np.exp(-lam * tau_a)

    def to_dict(self):
        return {"kind": "exponential"}


@dataclass(frozen=True)
class CustomCollocation:
    pdf_func: Callable[[float, float], float]
    cdf_func: Callable[[float, float], float]
    pdf_dlambda_func: Callable[[float, float], float]

    kind = "custom"

    # lambda = 0 is the back-off action: collocation never happens
    def pdf(self, tau_a, lam):
        f = np.vectorize(lambda t, l: self.pdf_func(t, l) if l > 0 else 0.0, otypes=[float])
        return f(tau_a, lam)

    def cdf(self, tau_a, lam):
        f = np.vectorize(lambda t, l: self.cdf_func(t, l) if l > 0 else 0.0, otypes=[float])
        return f(tau_a, lam)

    def pdf_dlambda(self, tau_a, lam):
        return np.vectorize(self.pdf_dlambda_func, otypes=[float])(tau_a, lam)

    def to_dict(self):
        raise TypeError("custom collocation models are not serializable")


# --------------------------------------------------------------------------
# game configuration

@dataclass(frozen=True)
class GameConfig:
    T: float
    lambda_max: float
    C_a: float
    C_d: float
    tau_min: float = DEFAULT_TAU_MIN
    lambda_min: float = DEFAULT_LAMBDA_MIN
    reward: PolynomialReward | CustomReward = field(default_factory=PolynomialReward)
    collocation: ExponentialCollocation | CustomCollocation = field(
        default_factory=ExponentialCollocation)

    def to_dict(self):
        return {
            "T": self.T, "tau_min": self.tau_min,
            "lambda_min": self.lambda_min, "lambda_max": self.lambda_max,
            "C_a": self.C_a, "C_d": self.C_d,
            "reward": self.reward.to_dict(),
            "collocation": self.collocation.to_dict(),
        }


@dataclass(frozen=True)
class Game(GameConfig):
    """A GameConfig that passed :func:`validate_config`. Immutable."""

    @property
    def tau_interval(self):
        return (self.tau_min, self.T)

    @property
    def lambda_interval(self):
        return (self.lambda_min, self.lambda_max)

    @property
    def is_linear_exponential(self):
        """True when the closed forms for linear G / exponential f apply."""
        return (isinstance(self.reward, PolynomialReward) and self.reward.exponent == 1
                and isinstance(self.collocation, ExponentialCollocation))

    @property
    def alpha(self):
        return self.reward.alpha if isinstance(self.reward, PolynomialReward) else None

    def with_costs(self, C_d=None, C_a=None):
        kw = {f.name: getattr(self, f.name) for f in fields(self)}
        if C_d is not None:
            kw["C_d"] = float(C_d)
        if C_a is not None:
            kw["C_a"] = float(C_a)
        return validate_config(GameConfig(**kw))


def _check_reward(reward, T):
    if isinstance(reward, PolynomialReward):
        out = []
        if not (isinstance(reward.exponent, (int, np.integer)) and reward.exponent >= 1):
            out.append(("NonMonotoneReward", f"exponent must be a positive integer, got {reward.exponent!r}"))
        if not reward.alpha > 0:
            out.append(("NonMonotoneReward", f"alpha must be > 0, got {reward.alpha!r}"))
        return out
    td = np.linspace(0.0, T, VALIDATION_GRID)
    ta = np.linspace(0.0, T, VALIDATION_GRID)
    TD, TA = np.meshgrid(td, ta, indexing="ij")
    G = reward.value(TD, TA)
    if not np.all(np.isfinite(G)):
        return [("NonMonotoneReward", "reward is not finite on the validation grid")]
    out = []
    if G.min() < 0:
        out.append(("NonMonotoneReward", f"reward is negative (min {G.min():.3g})"))
    tol = 1e-12 * max(1.0, float(np.abs(G).max()))
    if np.any(np.diff(G, axis=0) < -tol):
        out.append(("NonMonotoneReward", "reward decreases in tau_d"))
    if np.any(np.diff(G, axis=1) > tol):
        out.append(("NonMonotoneReward", "reward increases in tau_a"))
    return out


def _check_collocation(model, T, lam_lo, lam_hi):
    if isinstance(model, ExponentialCollocation):
        return []
    out = []
    lams = np.linspace(max(lam_lo, 1e-3 * lam_hi), lam_hi, 5)
    for lam in lams:
        mass, _ = integrate.quad(lambda t: float(model.pdf(t, lam)), 0.0, np.inf,
                                 epsabs=1e-10, limit=200)
        if abs(mass - 1.0) > 1e-6:
            out.append(("BadDistribution", f"pdf mass {mass:.9g} at lambda={lam:g}"))
            break
    t = np.linspace(0.0, T, VALIDATION_GRID)
    lg = np.linspace(max(lam_lo, 1e-3 * lam_hi), lam_hi, VALIDATION_GRID)
    F = model.cdf(t[None, :], lg[:, None])
    if np.any(np.diff(F, axis=0) < -1e-12):
        out.append(("BadDistribution", "CDF is not ordered in lambda (dominance fails)"))
    return out


def validate_config(config: GameConfig) -> Game:
    """Check every invariant; return a :class:`Game` or raise with all violations."""
    problems = []
    c = config
    nums = {"T": c.T, "tau_min": c.tau_min, "lambda_min": c.lambda_min,
            "lambda_max": c.lambda_max, "C_a": c.C_a, "C_d": c.C_d}
    for k, v in nums.items():
        if not (isinstance(v, (int, float, np.floating, np.integer)) and math.isfinite(v)):
            problems.append(("InvalidInterval" if k not in ("C_a", "C_d") else "NegativeCost",
                             f"{k} must be a finite number, got {v!r}"))
    if problems:
        _raise(problems)
    if not (0 < c.tau_min <= c.T):
        problems.append(("InvalidInterval", f"need 0 < tau_min <= T, got tau_min={c.tau_min}, T={c.T}"))
    if not (0 <= c.lambda_min < c.lambda_max):
        problems.append(("InvalidInterval",
                         f"need 0 <= lambda_min < lambda_max, got [{c.lambda_min}, {c.lambda_max}]"))
    if c.C_a < 0:
        problems.append(("NegativeCost", f"C_a must be >= 0, got {c.C_a}"))
    if c.C_d < 0:
        problems.append(("NegativeCost", f"C_d must be >= 0, got {c.C_d}"))
    if c.T > 0:
        problems += _check_reward(c.reward, c.T)
        if c.lambda_max > 0:
            problems += _check_collocation(c.collocation, c.T, max(c.lambda_min, 0.0), c.lambda_max)
    if problems:
        _raise(problems)
    return Game(**{f.name: getattr(c, f.name) for f in fields(GameConfig)})


_ERRORS = {"InvalidInterval": InvalidInterval, "NegativeCost": NegativeCost,
           "NonMonotoneReward": NonMonotoneReward, "BadDistribution": BadDistribution}


def _raise(problems):
    raise _ERRORS.get(problems[0][0], InvalidConfig)(problems)


# --------------------------------------------------------------------------
# point-wise operations

def reward_value(reward, tau_d: float, tau_a: float) -> float:
    return float(reward.value(tau_d, tau_a))


def _nonneg(tau_a, lam):
    if tau_a < 0 or lam < 0:
        raise NegativeInput(f"tau_a and lambda_a must be >= 0 (got {tau_a}, {lam})")


def collocation_pdf(model, tau_a: float, lambda_a: float) -> float:
    _nonneg(tau_a, lambda_a)
    return float(model.pdf(tau_a, lambda_a))


def collocation_cdf(model, tau_a: float, lambda_a: float) -> float:
    _nonneg(tau_a, lambda_a)
    return float(model.cdf(tau_a, lambda_a))


def collocation_pdf_dlambda(model, tau_a: float, lambda_a: float) -> float:
    _nonneg(tau_a, lambda_a)
    return float(model.pdf_dlambda(tau_a, lambda_a))


# --------------------------------------------------------------------------
# JSON

def config_from_dict(d: dict) -> GameConfig:
    rd = d.get("reward", {"kind": "polynomial"})
    if rd.get("kind", "polynomial") != "polynomial":
        raise InvalidConfig([("NonMonotoneReward", f"unsupported reward kind {rd.get('kind')!r}")])
    reward = PolynomialReward(exponent=int(rd.get("exponent", 1)), alpha=float(rd.get("alpha", 1.0)))
    cd = d.get("collocation", {"kind": "exponential"})
    if cd.get("kind", "exponential") != "exponential":
        raise InvalidConfig([("BadDistribution", f"unsupported collocation kind {cd.get('kind')!r}")])
    try:
        return GameConfig(
            T=float(d["T"]), lambda_max=float(d["lambda_max"]),
            C_a=float(d["C_a"]), C_d=float(d["C_d"]),
            tau_min=float(d.get("tau_min", DEFAULT_TAU_MIN)),
            lambda_min=float(d.get("lambda_min", DEFAULT_LAMBDA_MIN)),
            reward=reward, collocation=ExponentialCollocation())
    except KeyError as e:
        raise InvalidConfig([("InvalidInterval", f"missing field {e.args[0]!r}")]) from None


def load_config(path) -> Game:
    with open(path) as fh:
        return validate_config(config_from_dict(json.load(fh)))
