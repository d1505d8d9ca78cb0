"""Command-line entry point: ``ratchet-pricing <command> --config run.json``.

Every run is described by one JSON document; flags only pick files and the
worker count. Exit codes: 0 success, 2 invalid configuration, 3 failed
verification, 4 input/output problems.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from datetime import datetime

import numpy as np

from . import __version__
from . import checks
from . import closed_form as cf
from . import config as cfg
from . import dp_oracle as dp
from . import empirics, nonlinear, sim
from .errors import ArchiveFormatError, UnsupportedConfigurationError, ValidationError
from .formatting import fmt

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VERIFY = 3
EXIT_IO = 4

COMMANDS = ("solve", "verify", "sweep", "simulate", "synth", "empirics")
PRICE_GAP_HEADER = ("kappa", "gamma2", "regime", "e_avg_flex", "e_avg_reg", "diff", "cs_diff", "status")


class _Run:
    """Per-invocation state shared by the command handlers."""

    def __init__(self, command: str, config: dict, workers: int):
        self.command = command
        self.config = config
        self.workers = workers
        self.digest = cfg.config_hash(config)

    def metadata(self, **extra) -> dict:
        meta = {
            "package": "ratchet_pricing",
            "version": __version__,
            "command": self.command,
            "seed": self.config.get("seed"),
            "config_sha256": self.digest,
        }
        meta.update(extra)
        return meta

    def comment(self, **extra) -> str:
        meta = self.metadata(**extra)
        seed = "none" if meta["seed"] is None else meta["seed"]
        parts = [f"# ratchet_pricing {__version__}", f"command={self.command}", f"seed={seed}"]
        parts.append(f"config_sha256={self.digest}")
        parts += [f"{k}={v}" for k, v in extra.items()]
        return " ".join(parts) + "\n"


def _num(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


# --- solve --------------------------------------------------------------------


def _closed_form_report(params) -> dict:
    out = {
        "regime": None,
        "kappa": None,
        "gamma_tilde": None,
        "p_high": params.p_high,
        "p_low": params.p_low,
        "p1_low": None,
        "low_targets": None,
        "e_avg_flex": None,
        "e_avg_reg": None,
        "cs_diff": None,
        "closed_form_available": True,
    }
    try:
        policy = cf.regulated_policy(params)
    except UnsupportedConfigurationError:
        out["closed_form_available"] = False
        return out
    targets = [float(v) for v in policy.low_targets]
    out["low_targets"] = targets
    out["p1_low"] = targets[0]
    two_period = params.linear and params.truncated and params.T == 2
    if two_period:
        out["regime"] = str(cf.regime_classify(params))
        out["kappa"] = cf.kappa(params)
        out["gamma_tilde"] = cf.gamma_tilde(params)
        out["e_avg_flex"] = cf.expected_avg_price_flexible(params)
        out["e_avg_reg"] = cf.expected_avg_price_regulated_2p(params)
        out["cs_diff"] = cf.expected_cs_diff_2p(params)
    elif params.T <= dp.MAX_ENUMERATION_T:
        flex = dp.enumerate_expectation(cf.flexible_policy(params), params)
        reg = dp.enumerate_expectation(policy, params)
        out["e_avg_flex"] = flex.expected_avg_price
        out["e_avg_reg"] = reg.expected_avg_price
    return out


def _oracle_report(params, points: int) -> dict:
    policy = dp.solve_dp(params, dp.GridSpec.default(params, points))
    targets = [float(policy.price(t, np.inf, False)) for t in range(1, params.T + 1)]
    out = {"grid_points": points, "grid_step": policy.grid.step, "p1_low": targets[0], "low_targets": targets}
    if params.T <= dp.MAX_ENUMERATION_T:
        flex = dp.enumerate_expectation(cf.flexible_policy(params), params)
        reg = dp.enumerate_expectation(policy, params)
        out["e_avg_flex"] = flex.expected_avg_price
        out["e_avg_reg"] = reg.expected_avg_price
        if reg.expected_total_cs is not None:
            out["cs_diff"] = reg.expected_total_cs - flex.expected_total_cs
    return out


def cmd_solve(run: _Run, out) -> int:
    params = cfg.market_from_config(run.config["market"])
    report = _closed_form_report(params)
    points = run.config.get("grid_points", 2001)
    if run.config.get("oracle", False) or not report["closed_form_available"]:
        report["oracle"] = _oracle_report(params, points)
    report = {"metadata": run.metadata(), **report}
    json.dump(report, out, indent=2, default=_num)
    out.write("\n")
    return EXIT_OK


# --- verify -------------------------------------------------------------------


def cmd_verify(run: _Run, out) -> int:
    c = run.config
    names = c.get("checks")
    unknown = [n for n in names or [] if n not in checks.ALL_CHECKS]
    if unknown:
        raise ValidationError(f"config field checks: unknown check(s) {', '.join(unknown)}")
    tolerances = c.get("tolerances", {})
    bad = [n for n in tolerances if n not in checks.ALL_CHECKS]
    if bad:
        raise ValidationError(f"config field tolerances: unknown check(s) {', '.join(bad)}")
    ctx = checks.Context(
        grid_points=c.get("grid_points", 2001),
        oracle_tolerance=c.get("oracle_tolerance"),
        tolerances=dict(tolerances),
    )
    out.write(run.comment())
    results = []
    for name in names or checks.ALL_CHECKS:
        r = checks.run_check(name, ctx)
        results.append(r)
        out.write(r.line() + "\n")
    failed = [r.name for r in results if r.mode != "info" and not r.passed]
    out.write(f"# {len(results) - len(failed)} of {len(results)} checks passed")
    out.write(f"; failed: {', '.join(failed)}\n" if failed else "\n")
    return EXIT_VERIFY if failed else EXIT_OK


# --- sweep --------------------------------------------------------------------


def _price_gap_rows(config: dict):
    base = cfg.market_from_config(config["market"])
    if base.T != 2 or not base.linear or not base.truncated:
        raise ValidationError("config field market: price_gap sweep needs a two-period truncated linear market")
    kappas = sorted(config.get("kappa_grid", [cf.kappa(base)]))
    g1 = base.gammas[0]
    rows = []
    for k in kappas:
        for g2 in sorted(config["gamma2_grid"]):
            try:
                d_high = base.d_low + k * (base.d_low - base.c)
                params = base.replace(d_high=d_high, gammas=(g1, g2))
                flex = cf.expected_avg_price_flexible(params)
                reg = cf.expected_avg_price_regulated_2p(params)
                row = [k, g2, str(cf.regime_classify(params)), flex, reg, reg - flex, cf.expected_cs_diff_2p(params), "ok"]
            except ValidationError:
                row = [k, g2, None, None, None, None, None, "infeasible"]
            rows.append(row)
    return rows


def cmd_sweep(run: _Run, out) -> int:
    c = run.config
    out.write(run.comment(kind=c["kind"]))
    if c["kind"] == "delta":
        rows = nonlinear.sweep_delta(
            c["q_grid"],
            c["a_grid"],
            T=c.get("T", 2),
            d_high=c.get("d_high", nonlinear.CANONICAL_D_HIGH),
            d_low=c.get("d_low", nonlinear.CANONICAL_D_LOW),
            grid_points=c.get("grid_points", 2001),
            workers=run.workers,
        )
        out.write(nonlinear.sweep_to_csv(rows))
        return EXIT_OK
    w = csv.writer(out, lineterminator="\n")
    w.writerow(PRICE_GAP_HEADER)
    for row in _price_gap_rows(c):
        w.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    return EXIT_OK


# --- simulate / synth / empirics -------------------------------------------


def _sim_config(c: dict, default_policy: str) -> sim.SimConfig:
    return sim.SimConfig(
        params=cfg.market_from_config(c["market"]),
        policy=c.get("policy", default_policy),
        replications=c.get("replications", 1),
        seed=c["seed"],
        grid_points=c.get("grid_points", 2001),
    )


def cmd_simulate(run: _Run, out) -> int:
    config = _sim_config(run.config, "flexible")
    report = sim.run_mc(config, workers=run.workers)
    out.write(run.comment(policy=config.policy))
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["statistic", "period", "value"])
    w.writerow(["replications", "", report.replications])
    w.writerow(["mean_avg_price", "", fmt(report.mean_avg_price)])
    w.writerow(["stderr_avg_price", "", fmt(report.stderr_avg_price) if report.stderr_defined else ""])
    w.writerow(["mean_total_profit", "", fmt(report.mean_total_profit)])
    w.writerow(["mean_total_cs", "", fmt(report.mean_total_cs)])
    for t, v in enumerate(report.per_period_mean_price, start=1):
        w.writerow(["mean_price", t, fmt(v)])
    return EXIT_OK


def cmd_synth(run: _Run, out) -> int:
    c = run.config
    config = _sim_config(c, "regulated_closed_form")
    try:
        start = datetime.fromisoformat(c.get("start_date", sim.DEFAULT_START.date().isoformat()))
    except ValueError:
        raise ValidationError(f"config field start_date: not an ISO date: {c['start_date']!r}") from None
    records = sim.synthesize_archive(
        config, c["stations"], c["days"], c["reform_day"], c.get("noise_sd", 0.0), start=start
    )
    reform = sim.reform_instant(c["reform_day"], start)
    out.write(run.comment(policy=config.policy, reform_instant=reform.isoformat()))
    out.write(empirics.archive_to_csv(records))
    return EXIT_OK


def cmd_empirics(run: _Run, out) -> int:
    c = run.config
    try:
        reform = empirics.parse_timestamp(c["reform_instant"])
    except ValueError:
        raise ValidationError(f"config field reform_instant: not an ISO timestamp: {c['reform_instant']!r}") from None
    with open(c["input"], "rb") as fh:
        parsed = empirics.parse_archive(fh)
    for d in parsed.diagnostics:
        print(f"warning: {d}", file=sys.stderr)
    report = c.get("report", "hourly_diff")
    conventions = {"quartiles": "median_of_halves", "ci": "normal_z1.6449_ddof1"}
    out.write(run.comment(report=report, **conventions))
    if report == "hourly_diff":
        out.write(empirics.hourly_diff_to_csv(empirics.hourly_diff(parsed.records, reform)))
    else:
        diagnostics: list[str] = []
        rows = empirics.box_whisker(parsed.records, empirics.BEFORE, reform, diagnostics)
        rows += empirics.box_whisker(parsed.records, empirics.AFTER, reform, diagnostics)
        for d in diagnostics:
            print(f"note: {d}", file=sys.stderr)
        out.write(empirics.box_whisker_to_csv(rows))
    return EXIT_OK


HANDLERS = {
    "solve": cmd_solve,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
    "simulate": cmd_simulate,
    "synth": cmd_synth,
    "empirics": cmd_empirics,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ratchet-pricing",
        description="Optimal pricing when prices may fall but never rise within a day.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=HANDLERS[name].__name__.replace("cmd_", ""))
        p.add_argument("--config", required=True, help="JSON config path, or - for stdin")
        p.add_argument("--out", default="-", help="output path, or - for stdout (default)")
        p.add_argument("--workers", type=int, default=os.cpu_count() or 1, help="worker processes")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    if args.workers < 1:
        print("error: --workers must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        config = cfg.load_json(args.config)
        cfg.validate(args.command, config)
        run = _Run(args.command, config, args.workers)
        # render fully before touching the output file, so failures leave no partial file
        buf = io.StringIO()
        code = HANDLERS[args.command](run, buf)
        if args.out == "-":
            sys.stdout.write(buf.getvalue())
            sys.stdout.flush()
        else:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(buf.getvalue())
        return code
    except ArchiveFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        # ValidationError, DomainError and friends
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
