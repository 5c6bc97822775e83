"""Command-line front end: ``solve``, ``sweep``, ``validate`` and ``schema``.

Exit codes: 0 on success, 1 on a configuration error, 2 when the
constraints are infeasible.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import simkit
from ._util import ordered_map
from .channel import NetworkScenario, hop_channels
from .config import SCHEMA, ConfigError, RunConfig, load_config
from .covert import (
    CovertConstraints,
    equal_power_covert,
    evaluate_covert,
    search_hops_covert,
)
from .errors import InfeasibleError
from .secrecy import (
    SecrecyConstraints,
    equal_power_secrecy,
    evaluate_secrecy,
    leakage_sum,
    search_hops_secrecy,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INFEASIBLE = 2

SECRECY_COLUMNS = (
    "hops", "zeta", "power_total", "uav_height",
    "gamma_e", "rate_tx", "rate_secret", "rate_redundancy",
    "p_connect", "p_secrecy_outage", "leakage_sum", "throughput", "a1",
    "p_avg", "p_min", "p_max",
    "eq_gamma_e", "eq_rate_tx", "eq_rate_secret", "eq_p_connect",
    "eq_p_secrecy_outage", "eq_throughput",
)
COVERT_COLUMNS = (
    "hops", "epsilon", "power_total", "uav_height",
    "rate_tx", "p_connect", "kl_bound", "throughput", "a2",
    "p_avg", "p_min", "p_max", "kl_multiplier", "power_multiplier", "active",
    "eq_rate_tx", "eq_p_connect", "eq_kl_bound", "eq_throughput", "eq_p_avg",
)
HOP_COLUMNS = ("hop", "tx_position", "dist_uav", "elevation_deg", "p_los", "coefficient", "power", "eq_power")
VALIDATE_COLUMNS = ("check", "hop", "closed_form", "oracle", "half_width", "trials", "passed")


@dataclass(frozen=True)
class RunResult:
    """Rows of the main table plus an optional per-hop power table."""

    columns: tuple
    rows: list
    hop_columns: tuple = ()
    hop_rows: list = dataclasses.field(default_factory=list)


def _secrecy_row(scenario: NetworkScenario, zeta: float, power_total: float, sol, eq) -> dict:
    channels = hop_channels(scenario)
    p = np.asarray(sol.powers)
    return {
        "hops": sol.hops, "zeta": zeta, "power_total": power_total,
        "uav_height": scenario.uav_height,
        "gamma_e": sol.gamma_e, "rate_tx": sol.rate_tx, "rate_secret": sol.rate_secret,
        "rate_redundancy": sol.rate_redundancy, "p_connect": sol.p_connect,
        "p_secrecy_outage": sol.p_secrecy_outage,
        "leakage_sum": leakage_sum(p, sol.gamma_e, channels),
        "throughput": sol.throughput, "a1": sol.a1,
        "p_avg": float(np.mean(p)), "p_min": float(np.min(p)), "p_max": float(np.max(p)),
        "eq_gamma_e": eq.gamma_e, "eq_rate_tx": eq.rate_tx, "eq_rate_secret": eq.rate_secret,
        "eq_p_connect": eq.p_connect, "eq_p_secrecy_outage": eq.p_secrecy_outage,
        "eq_throughput": eq.throughput,
    }


def _covert_row(scenario: NetworkScenario, epsilon: float, power_total: float, sol, eq) -> dict:
    p = np.asarray(sol.powers)
    return {
        "hops": sol.hops, "epsilon": epsilon, "power_total": power_total,
        "uav_height": scenario.uav_height,
        "rate_tx": sol.rate_tx, "p_connect": sol.p_connect, "kl_bound": sol.kl_bound,
        "throughput": sol.throughput, "a2": sol.a2,
        "p_avg": float(np.mean(p)), "p_min": float(np.min(p)), "p_max": float(np.max(p)),
        "kl_multiplier": sol.multipliers[0], "power_multiplier": sol.multipliers[1],
        "active": sol.active,
        "eq_rate_tx": eq.rate_tx, "eq_p_connect": eq.p_connect, "eq_kl_bound": eq.kl_bound,
        "eq_throughput": eq.throughput, "eq_p_avg": eq.average_power,
    }


def _solve_point(problem: str, scenario: NetworkScenario, cfg: RunConfig, value_override=None,
                 threads: int = 1):
    """Optimized and equal-power solutions for one scenario.

    With ``hops: auto`` each scheme gets its own best hop count.
    """
    if problem == "secrecy":
        zeta = cfg.zeta if value_override is None else value_override
        cons = SecrecyConstraints(zeta, cfg.power_total)
        if cfg.hop_search:
            n, sol = search_hops_secrecy(scenario, cons, cfg.n_max, threads=threads)
            _, eq = search_hops_secrecy(scenario, cons, cfg.n_max, equal_power=True, threads=threads)
            scenario = scenario.with_hops(n)
        else:
            sol = evaluate_secrecy(scenario, cons)
            eq = equal_power_secrecy(scenario, cons)
        return scenario, sol, eq, _secrecy_row(scenario, zeta, cfg.power_total, sol, eq)
    eps = cfg.epsilon if value_override is None else value_override
    cons = CovertConstraints(eps, cfg.power_total)
    if cfg.hop_search:
        n, sol = search_hops_covert(scenario, cons, cfg.n_max, threads=threads)
        _, eq = search_hops_covert(scenario, cons, cfg.n_max, equal_power=True, threads=threads)
        scenario = scenario.with_hops(n)
    else:
        sol = evaluate_covert(scenario, cons)
        eq = equal_power_covert(scenario, cons)
    return scenario, sol, eq, _covert_row(scenario, eps, cfg.power_total, sol, eq)


def _hop_table(problem: str, scenario: NetworkScenario, cfg: RunConfig, sol) -> list:
    # the baseline is shown at the optimized hop count even under hop search
    if problem == "secrecy":
        eq = equal_power_secrecy(scenario, SecrecyConstraints(cfg.zeta, cfg.power_total))
    else:
        eq = equal_power_covert(scenario, CovertConstraints(cfg.epsilon, cfg.power_total))
    rows = []
    for ch, p, q in zip(hop_channels(scenario), sol.powers, eq.powers):
        rows.append({
            "hop": ch.index,
            "tx_position": (ch.index - 1) * scenario.hop_length,
            "dist_uav": ch.dist_uav,
            "elevation_deg": ch.elevation_deg,
            "p_los": ch.p_los,
            "coefficient": ch.secrecy_coeff if problem == "secrecy" else ch.covert_coeff,
            "power": float(p),
            "eq_power": float(q),
        })
    return rows


def run_solve(cfg: RunConfig, threads: int = 1) -> RunResult:
    problem = cfg.mode
    scenario, sol, _, row = _solve_point(problem, cfg.scenario, cfg, threads=threads)
    cols = ("problem",) + (SECRECY_COLUMNS if problem == "secrecy" else COVERT_COLUMNS)
    return RunResult(cols, [{"problem": problem, **row}], HOP_COLUMNS,
                     _hop_table(problem, scenario, cfg, sol))


def _sweep_scenario(cfg: RunConfig, value):
    var = cfg.sweep.variable
    if var == "height":
        return dataclasses.replace(cfg.scenario, uav_height=float(value)), None
    if var == "hops":
        return cfg.scenario.with_hops(int(value)), None
    return cfg.scenario, float(value)


def run_sweep(cfg: RunConfig, threads: int = 1) -> RunResult:
    sw = cfg.sweep
    if sw.variable == "hops" and cfg.hop_search:
        cfg = dataclasses.replace(cfg, hop_search=False)

    def point(value):
        scenario, override = _sweep_scenario(cfg, value)
        return _solve_point(sw.problem, scenario, cfg, override)[3]

    rows = ordered_map(point, sw.grid(), threads)
    base = SECRECY_COLUMNS if sw.problem == "secrecy" else COVERT_COLUMNS
    cols = ("problem", "variable", "value") + base
    out = [{"problem": sw.problem, "variable": sw.variable, "value": v, **r}
           for v, r in zip(sw.grid(), rows)]
    return RunResult(cols, out)


def _check(name, closed, est: simkit.OracleEstimate, passed, hop=0) -> dict:
    return {"check": name, "hop": hop, "closed_form": float(closed), "oracle": est.value,
            "half_width": est.half_width_95, "trials": est.trials, "passed": bool(passed)}


def _exact(name, closed, value, passed, hop=0) -> dict:
    return {"check": name, "hop": hop, "closed_form": float(closed), "oracle": float(value),
            "half_width": 0.0, "trials": 0, "passed": bool(passed)}


def run_validate(cfg: RunConfig, threads: int = 1) -> RunResult:
    """Closed forms against the Monte Carlo and quadrature oracles.

    Pass rules: estimates must cover the closed form within three 95%
    half-widths; the exact secrecy outage must not fall below the optimizer's
    approximation (mixture averaged inside the exponent can only understate
    it); relative entropies must respect true <= mixture bound <= quadratic
    bound; the warden's error must stay above both the Pinsker bound and
    ``1 - epsilon``.
    """
    rows = []
    trials, seed = cfg.trials, cfg.seed
    if cfg.zeta is not None:
        scenario, sol, _, _ = _solve_point("secrecy", cfg.scenario, cfg, threads=threads)
        est = simkit.mc_connection(scenario, sol.powers, sol.rate_tx, trials, seed, threads)
        rows.append(_check("secrecy.connection", sol.p_connect, est, est.covers(sol.p_connect)))
        exact = simkit.exact_secrecy_outage(scenario, sol.powers, sol.gamma_e)
        est = simkit.mc_secrecy_outage(scenario, sol.powers, sol.rate_redundancy, trials, seed, threads)
        rows.append(_check("secrecy.outage_exact", exact, est, est.covers(exact)))
        rows.append(_check("secrecy.outage_jensen", sol.p_secrecy_outage, est,
                           est.value >= sol.p_secrecy_outage - 3 * est.half_width_95))
    if cfg.epsilon is not None:
        scenario, sol, _, _ = _solve_point("covert", cfg.scenario, cfg, threads=threads)
        est = simkit.mc_connection(scenario, sol.powers, sol.rate_tx, trials, seed, threads)
        rows.append(_check("covert.connection", sol.p_connect, est, est.covers(sol.p_connect)))
        channels = hop_channels(scenario)
        true_total = 0.0
        for ch, p in zip(channels, sol.powers):
            quad = ch.covert_coeff * p * p
            true = simkit.true_kl_per_hop(scenario, float(p), ch.index)
            mix = simkit.mixture_kl_bound(scenario, float(p), ch.index)
            tol = simkit.KL_RTOL
            ok = true <= mix * (1 + tol) + 1e-300 and mix <= quad * (1 + tol)
            rows.append(_exact("covert.kl_chain", quad, true, ok, ch.index))
            true_total += true
        warden = simkit.warden_detection_error(scenario, sol.powers, trials, seed, threads)
        pinsker = 1.0 - math.sqrt(true_total / 2.0)
        rows.append(_check("covert.pinsker", pinsker, warden,
                           warden.value >= pinsker - 3 * warden.half_width_95))
        target = 1.0 - cfg.epsilon
        rows.append(_check("covert.budget", target, warden,
                           warden.value >= target - 3 * warden.half_width_95))
    return RunResult(VALIDATE_COLUMNS, rows)


def run(cfg: RunConfig, threads: int = 1) -> RunResult:
    if cfg.mode == "sweep":
        return run_sweep(cfg, threads)
    if cfg.mode == "validate":
        return run_validate(cfg, threads)
    return run_solve(cfg, threads)


def _cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def format_csv(columns: Sequence[str], rows: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r[c]) for c in columns])
    return buf.getvalue()


def format_json(result: RunResult) -> str:
    def clean(rows, cols):
        return [{c: r[c] for c in cols} for r in rows]

    doc = {"columns": list(result.columns), "rows": clean(result.rows, result.columns)}
    if result.hop_rows:
        doc["hop_columns"] = list(result.hop_columns)
        doc["hops"] = clean(result.hop_rows, result.hop_columns)
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def _hop_path(path: Path) -> Path:
    return path.with_name(f"{path.stem}.hops{path.suffix or '.csv'}")


def write_result(result: RunResult, fmt: str, out: Optional[str], stream=None) -> list:
    """Write tables; returns the paths written (empty when printing)."""
    stream = stream or sys.stdout
    if fmt == "json":
        text, hop_text = format_json(result), None
    else:
        text = format_csv(result.columns, result.rows)
        hop_text = format_csv(result.hop_columns, result.hop_rows) if result.hop_rows else None
    if out is None:
        stream.write(text)
        if hop_text is not None:
            stream.write("\n" + hop_text)
        return []
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="")
    written = [path]
    if hop_text is not None:
        _hop_path(path).write_text(hop_text, encoding="utf-8", newline="")
        written.append(_hop_path(path))
    return written


_MODES = {"solve": ("secrecy", "covert"), "sweep": ("sweep",), "validate": ("validate",)}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uavhop", description="Multi-hop relay planning against a UAV eavesdropper or warden.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("solve", "optimize one secrecy or covert configuration"),
        ("sweep", "optimize over a parameter grid"),
        ("validate", "check closed forms against simulation oracles"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="YAML run configuration")
        p.add_argument("--out", help="output file (default: config output.path or stdout)")
        p.add_argument("--format", choices=("csv", "json"), help="table format")
        p.add_argument("--seed", type=int, help="Monte Carlo seed, overrides mc.seed")
        p.add_argument("--threads", type=int, default=1, help="worker threads")
    sub.add_parser("schema", help="print the configuration JSON schema")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "schema":
        sys.stdout.write(json.dumps(SCHEMA, indent=2) + "\n")
        return EXIT_OK
    try:
        cfg = load_config(args.config)
        if cfg.mode not in _MODES[args.command]:
            raise ConfigError(f"mode: {cfg.mode!r} cannot run under '{args.command}'")
        if args.seed is not None:
            if not 0 <= args.seed < 2 ** 64:
                raise ConfigError("--seed: must be an unsigned 64-bit integer")
            cfg = dataclasses.replace(cfg, seed=args.seed)
        if args.threads < 1:
            raise ConfigError("--threads: must be at least 1")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        result = run(cfg, args.threads)
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    fmt = args.format or cfg.output_format
    out = args.out if args.out is not None else cfg.output_path
    write_result(result, fmt, out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
