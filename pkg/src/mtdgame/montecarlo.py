"""Monte-Carlo estimates of the realized payoffs and the strategy comparison table.

Randomness comes from Philox (counter-based) streams keyed by ``(seed, chunk)``,
so a report is bit-identical for a given seed no matter how many worker
threads evaluate the chunks.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import optimize

from .model import ExponentialCollocation, Game
from .nash import find_equilibria
from .payoff import _realized, check_point, payoff_arrays
from .errors import NoEquilibriumFound

CHUNK = 1 << 17


def rng_for(seed: int, stream: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(stream,))))


def exponential_inverse_cdf(u, lambda_a):
    """Collocation time for a uniform draw ``u`` in (0, 1]; +inf when lambda_a = 0."""
    u = np.asarray(u, float)
    if lambda_a == 0:
        return np.full(u.shape, np.inf) if u.ndim else math.inf
    out = -np.log(u) / lambda_a
    return float(out) if out.ndim == 0 else out


def _sample(model, lambda_a, n, rng):
    u = 1.0 - rng.random(n)  # (0, 1]
    if isinstance(model, ExponentialCollocation):
        return exponential_inverse_cdf(u, lambda_a)
    if lambda_a == 0:
        return np.full(n, np.inf)
    return np.array([_invert_cdf(model, 1.0 - ui, lambda_a) for ui in u])


def _invert_cdf(model, p, lam):
    F = lambda t: float(model.cdf(t, lam)) - p
    hi = 1.0 / lam
    while F(hi) < 0:
        hi *= 2
        if hi > 1e12:
            return math.inf
    return optimize.brentq(F, 0.0, hi, xtol=1e-13)


def sample_collocation_time(model, lambda_a: float, rng: np.random.Generator) -> float:
    if lambda_a < 0:
        raise ValueError("lambda_a must be >= 0")
    return float(_sample(model, lambda_a, 1, rng)[0])


@dataclass(frozen=True)
class SimulationReport:
    tau_d: float
    lambda_a: float
    n_samples: int
    mean_u_a: float
    mean_u_d: float
    stderr_u_a: float
    stderr_u_d: float
    empirical_collocation_prob: float
    seed: int

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def _chunk_stats(game, tau_d, lambda_a, seed, idx, n):
    tau_a = _sample(game.collocation, lambda_a, n, rng_for(seed, idx))
    ua, ud = _realized(game, tau_d, tau_a, lambda_a)
    ua = np.broadcast_to(ua, (n,))
    ud = np.broadcast_to(ud, (n,))
    ma, md = ua.mean(), ud.mean()
    return (n, ma, md, float(((ua - ma) ** 2).sum()), float(((ud - md) ** 2).sum()),
            int(np.count_nonzero(tau_a < tau_d)))


def _merge(stats):
    # pairwise (Chan et al.) update, applied in chunk order
    n, ma, md, m2a, m2d, hits = stats[0]
    for nb, mab, mdb, m2ab, m2db, hb in stats[1:]:
        tot = n + nb
        da, dd = mab - ma, mdb - md
        ma = ma + da * nb / tot
        md = md + dd * nb / tot
        m2a = m2a + m2ab + da * da * n * nb / tot
        m2d = m2d + m2db + dd * dd * n * nb / tot
        n, hits = tot, hits + hb
    return n, ma, md, m2a, m2d, hits


def simulate_strategy_pair(game: Game, tau_d: float, lambda_a: float, n: int = 10 ** 6,
                           seed: int = 0, threads: int = 1, _check=True) -> SimulationReport:
    """Average realized payoffs over ``n`` sampled collocation times."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if _check:
        check_point(game, tau_d, lambda_a)
    sizes = [CHUNK] * (n // CHUNK) + ([n % CHUNK] if n % CHUNK else [])
    jobs = [(game, tau_d, lambda_a, seed, i, s) for i, s in enumerate(sizes)]
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            stats = list(ex.map(lambda a: _chunk_stats(*a), jobs))
    else:
        stats = [_chunk_stats(*a) for a in jobs]
    n, ma, md, m2a, m2d, hits = _merge(stats)
    sd = (lambda m2: math.sqrt(m2 / (n - 1)) if n > 1 else 0.0)
    return SimulationReport(float(tau_d), float(lambda_a), n, float(ma), float(md),
                            sd(m2a) / math.sqrt(n), sd(m2d) / math.sqrt(n), hits / n, int(seed))


# ------------------------------------------------------------ strategy table

COLUMNS = ("ne", "nodef", "noatk", "aggr", "worst")
CSV_HEADER = ["C_d", "C_a"] + [f"{c}_{p}" for c in COLUMNS for p in ("ud", "ua")]


@dataclass
class TableRow:
    C_d: float
    C_a: float
    ne_point: tuple
    # column -> (u_d, u_a)
    cells: dict = field(default_factory=dict)

    def values(self):
        return [self.C_d, self.C_a] + [v for c in COLUMNS for v in self.cells[c]]


@dataclass
class StrategyTable:
    rows: list
    mode: str = "analytic"
    edge_offset: float = 0.0

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow([repr(float(v)) for v in r.values()])
        return buf.getvalue()

    @staticmethod
    def parse_csv(text: str):
        rd = csv.DictReader(io.StringIO(text))
        return [{k: float(v) for k, v in row.items()} for row in rd]


def strategy_profiles(game: Game, ne_point, edge_offset: float = 0.0):
    """Action pairs behind each table column.

    Deviating columns pin the deviator's action and hold the opponent at its
    equilibrium component.  ``edge_offset`` moves the pinned "no migration"
    and "maximum rate" actions that far past the interval edge; some
    published tables were produced on grids that overshoot by one step.
    """
    tau, lam = ne_point
    T = game.T + edge_offset
    lmax = game.lambda_max + edge_offset
    return {"ne": (tau, lam), "nodef": (T, lam), "noatk": (tau, game.lambda_min),
            "aggr": (tau, lmax), "worst": (T, lmax)}


def strategy_table(game: Game, cost_rows, mode: str = "analytic", n_samples: int = 10 ** 6,
                   seed: int = 0, edge_offset: float = 0.0, threads: int = 1) -> StrategyTable:
    """Payoffs of NE play against the four pinned alternatives, one row per (C_d, C_a)."""
    if mode not in ("analytic", "simulated"):
        raise ValueError(f"unknown mode {mode!r}")
    rows = []
    for k, (C_d, C_a) in enumerate(cost_rows):
        g = game.with_costs(C_d=C_d, C_a=C_a)
        rep = find_equilibria(g)
        if not rep.equilibria:
            raise NoEquilibriumFound(f"no equilibrium for C_d={C_d}, C_a={C_a}")
        eq = rep.equilibria[0]
        ne = (eq.tau_d_star, eq.lambda_a_star)
        cells = {}
        for j, (col, (t, l)) in enumerate(strategy_profiles(g, ne, edge_offset).items()):
            if mode == "analytic":
                ua, ud = payoff_arrays(g, t, l)
            else:
                s = simulate_strategy_pair(g, t, l, n_samples, seed=seed * 1000003 + 5 * k + j,
                                           threads=threads, _check=False)
                ua, ud = s.mean_u_a, s.mean_u_d
            cells[col] = (float(ud), float(ua))
        rows.append(TableRow(float(C_d), float(C_a), ne, cells))
    return StrategyTable(rows, mode, edge_offset)
