"""``mtd`` command line: one analysis verb per invocation, JSON/CSV out.

    mtd <verb> --config FILE [--out FILE] [--tau X] [--lambda X] [--grid NxM]
               [--samples N] [--seed S] [--threads N] [--require-ne]

Exit status: 0 success, 1 bad input/config, 2 numeric failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile

import numpy as np

from . import analysis, montecarlo, nash, payoff, response
from .errors import (InvalidConfig, MaxItersExceeded, MTDError, NoEquilibriumFound,
                     QuadratureNotConverged)
from .model import load_config

VERBS = ("payoff", "br-curve", "region", "thresholds", "solve", "simulate", "table")


def _fmt(v):
    return repr(float(v))


def _write(path, text):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".mtd-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _json(obj):
    return json.dumps(obj, indent=2, allow_nan=True) + "\n"


def _csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([x if isinstance(x, str) else _fmt(x) for x in r])
    return buf.getvalue()


def _grid(spec, default):
    if spec is None:
        return default
    parts = spec.lower().split("x")
    try:
        vals = tuple(int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad --grid {spec!r}") from None
    if len(vals) == 1:
        vals = (vals[0], vals[0])
    if len(vals) != 2 or min(vals) < 2:
        raise argparse.ArgumentTypeError(f"bad --grid {spec!r}")
    return vals


# ------------------------------------------------------------------ verbs

def cmd_payoff(game, a):
    if a.tau is not None and a.lam is not None:
        return _json(payoff.expected_payoffs(game, a.tau, a.lam).to_dict())
    n_t, n_l = _grid(a.grid, (64, 64))
    taus = [a.tau] if a.tau is not None else np.linspace(game.tau_min, game.T, n_t)
    lams = [a.lam] if a.lam is not None else np.linspace(game.lambda_min, game.lambda_max, n_l)
    rows = []
    for t in taus:
        payoff.check_point(game, t, game.lambda_min)
        for l in lams:
            payoff.check_point(game, game.tau_min, l)
            ua, ud = payoff.payoff_arrays(game, t, l)
            rows.append((t, l, ua, ud))
    return _csv(["tau_d", "lambda_a", "u_a", "u_d"], rows)


def cmd_br_curve(game, a):
    n = _grid(a.grid, (64, 64))[0]
    players = [a.player] if a.player else [response.DEFENDER, response.ATTACKER]
    rows = []
    for pl in players:
        for p in response.reaction_curve(game, pl, n).points:
            rows.append((p.player, p.opponent_action, p.kind, p.action, p.residual))
    return _csv(["player", "opponent_action", "kind", "action", "residual"], rows)


def cmd_region(game, a):
    n_t, n_l = _grid(a.grid, analysis.DEFAULT_GRID)
    taus, lams, M = analysis.margin_grid(game, n_t, n_l)
    rows = [(t, l, M[i, j]) for i, t in enumerate(taus) for j, l in enumerate(lams)]
    return _csv(["tau_d", "lambda_a", "margin"], rows)


def cmd_thresholds(game, a):
    tau = game.T if a.tau is None else a.tau
    lam = game.lambda_max if a.lam is None else a.lam
    ga, gd = analysis.general_monotonicity_thresholds(game, tau, lam)
    out = {
        "tau_d": tau, "lambda_a": lam,
        "attacker_min_rate": analysis.attacker_cost_threshold(game, tau).to_dict(),
        "defender_no_migrate": analysis.defender_cost_threshold(game, lam).to_dict(),
        "general_attacker": ga.to_dict(),
        "general_defender": gd.to_dict(),
        "corollaries": analysis.corollary_check(game) if game.is_linear_exponential else None,
        "certificate": (analysis.theorem2_certificate(game, _grid(a.grid, analysis.DEFAULT_GRID)).to_dict()
                        if game.is_linear_exponential else None),
        "backoff": analysis.backoff_equilibrium_check(game).to_dict() if game.lambda_min == 0 else None,
    }
    return _json(out)


def cmd_solve(game, a):
    n = _grid(a.grid, (64, 64))[0]
    rep = nash.find_equilibria(game, n_grid=n, require=a.require_ne)
    return _json(rep.to_dict())


def cmd_simulate(game, a):
    if a.tau is None or a.lam is None:
        raise InvalidConfig([("InvalidInterval", "simulate needs --tau and --lambda")])
    rep = montecarlo.simulate_strategy_pair(game, a.tau, a.lam, a.samples, a.seed, a.threads)
    return _json(rep.to_dict())


def cmd_table(game, a):
    if a.rows:
        with open(a.rows) as fh:
            rows = [(r["C_d"], r["C_a"]) for r in montecarlo.StrategyTable.parse_csv(fh.read())]
    else:
        rows = [(game.C_d, game.C_a)]
    tb = montecarlo.strategy_table(game, rows, mode=a.mode, n_samples=a.samples, seed=a.seed,
                                   edge_offset=a.edge_offset, threads=a.threads)
    return tb.to_csv()


COMMANDS = {"payoff": cmd_payoff, "br-curve": cmd_br_curve, "region": cmd_region,
            "thresholds": cmd_thresholds, "solve": cmd_solve, "simulate": cmd_simulate,
            "table": cmd_table}


def build_parser():
    p = argparse.ArgumentParser(prog="mtd", description="VM migration timing game solver")
    p.add_argument("verb", choices=VERBS)
    p.add_argument("--config", required=True, help="game config JSON")
    p.add_argument("--out", default=None, help="output file (default: stdout)")
    p.add_argument("--tau", type=float, default=None, help="defender migration time")
    p.add_argument("--lambda", dest="lam", type=float, default=None, help="attack rate")
    p.add_argument("--grid", default=None, help="resolution, N or NxM")
    p.add_argument("--samples", type=int, default=10 ** 6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--require-ne", action="store_true",
                   help="exit 2 when solve finds no equilibrium")
    p.add_argument("--player", choices=(response.ATTACKER, response.DEFENDER), default=None,
                   help="br-curve: restrict to one player")
    p.add_argument("--rows", default=None, help="table: CSV with C_d,C_a columns")
    p.add_argument("--mode", choices=("analytic", "simulated"), default="analytic")
    p.add_argument("--edge-offset", type=float, default=0.0,
                   help="table: evaluate pinned T / lambda_max this far past the edge")
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as e:
        return 1 if e.code else 0
    try:
        game = load_config(a.config)
        text = COMMANDS[a.verb](game, a)
        _write(a.out, text)
    except (QuadratureNotConverged, NoEquilibriumFound, MaxItersExceeded) as e:
        print(f"mtd: numeric failure: {e}", file=sys.stderr)
        return 2
    except (MTDError, OSError, ValueError, KeyError, argparse.ArgumentTypeError) as e:
        print(f"mtd: {e}", file=sys.stderr)
        return 1
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
