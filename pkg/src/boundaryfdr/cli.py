"""Command-line interface.

Three commands: ``simulate`` (Monte Carlo experiments and executable
probability checks), ``analyze`` (procedures applied to a real p-value
dataset), and ``calibrate`` (p-value calibration curves).  Every run writes
its result CSVs plus a ``manifest_<run-id>.json`` recording the full
parameter set; re-running with a manifest's parameters reproduces the CSVs
byte for byte.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import (
    DegenerateSolutionError,
    PopulationModel,
    boundary_lfdr_limit,
    convergence_probe,
    population_thresholds,
)
from .core import (
    Adjustment,
    ConfigurationError,
    Family,
    PValueSample,
    ProcedureSpec,
    ValidationError,
    order_sample,
    outcome_from_rank,
)
from .dataio import (
    DatasetDescriptor,
    load_pvalues,
    percent_of_total,
    selection_adjust,
    write_table,
)
from .engine import (
    MonteCarloEstimate,
    bfdr_curve,
    corr_sweep,
    expectation_bound_check,
    run_experiment,
    stage1_stability_check,
    uniform_boundary_probability,
)
from .lfdr import (
    INV_E,
    AltConfig,
    NoRootError,
    grenander_fit,
    lfdr_hat,
    sellke_alpha,
    sellke_alpha_pi0,
)
from .procedures import compile_procedure, standard_roster
from .simgen import SimConfig, mean_vector

GRID_TOLERANCE = 1e-9


def parse_grid(text: str) -> list[float]:
    """Parse the lo:hi:step grid grammar with inclusive endpoints."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValidationError(f"grid must look like lo:hi:step, got {text!r}")
    lo, hi, step = (float(p) for p in parts)
    if step <= 0 or hi < lo:
        raise ValidationError(f"bad grid bounds in {text!r}")
    values = []
    k = 0
    while lo + k * step <= hi + GRID_TOLERANCE:
        values.append(round(lo + k * step, 12))
        k += 1
    return values


def parse_list(text: str, cast=float) -> list:
    return [cast(tok) for tok in text.split(",") if tok.strip()]


def _family(text: str) -> Family:
    return Family.SL if text == "sl" else Family.BH


def build_roster(family: Family, q: float, pi0: float | None) -> list[ProcedureSpec]:
    include_oracle = pi0 is not None and pi0 > 0.0
    return standard_roster(family, q, true_pi0=pi0 if include_oracle else None,
                           include_oracle=include_oracle)


class RunWriter:
    """Collects output files and the manifest for one CLI run."""

    def __init__(self, command: str, args: argparse.Namespace):
        out_dir = args.out_dir or os.environ.get("BOUNDARY_FDR_OUTDIR", ".")
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.run_id = args.run_id or datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%S%f")
        self.command = command
        self.params = {
            k: v for k, v in vars(args).items() if k not in ("func",) and v is not None
        }
        self.outputs: list[str] = []
        self.started = time.monotonic()

    def path(self, stem: str, suffix: str = ".csv") -> Path:
        name = f"{stem}_{self.run_id}{suffix}"
        self.outputs.append(name)
        return self.out_dir / name

    def write(self, rows: list[dict], stem: str, fmt: str = "csv") -> Path:
        path = self.path(stem, f".{fmt}")
        write_table(rows, path, fmt)
        return path

    def finish(self, seed: int | None) -> Path:
        manifest = {
            "run_id": self.run_id,
            "command": self.command,
            "parameters": self.params,
            "master_seed": seed,
            "version": __version__,
            "outputs": self.outputs,
            "duration_seconds": round(time.monotonic() - self.started, 3),
        }
        path = self.out_dir / f"manifest_{self.run_id}.json"
        path.write_text(json.dumps(manifest, indent=2, default=str) + "\n", encoding="utf-8")
        return path


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def _sim_from_args(args: argparse.Namespace, **overrides) -> SimConfig:
    params = {
        "m": args.m,
        "pi0": args.pi0,
        "kind": args.config,
        "rho": getattr(args, "rho", 0.0),
        "seed": args.seed,
    }
    params.update(overrides)
    return SimConfig(**params)


def cmd_simulate(args: argparse.Namespace) -> int:
    writer = RunWriter(f"simulate {args.subcommand}", args)
    family = _family(args.family)

    if args.subcommand == "bfdr-curve":
        sim = _sim_from_args(args)
        roster = build_roster(family, args.q, args.pi0)
        rows = bfdr_curve(sim, roster, parse_grid(args.q_grid), args.n, workers=args.workers)
        writer.write(rows, "bfdr-curve")

    elif args.subcommand == "corr-sweep":
        sim = _sim_from_args(args)
        roster = build_roster(family, args.q, args.pi0)
        rows = corr_sweep(sim, parse_grid(args.rho_grid), roster, args.n, workers=args.workers)
        writer.write(rows, "corr-sweep")

    elif args.subcommand == "power-heatmap":
        rows = []
        for pi0 in parse_list(args.pi0_list):
            for m in parse_list(args.m_list, int):
                sim = _sim_from_args(args, pi0=pi0, m=m)
                table = run_experiment(
                    sim, build_roster(family, args.q, pi0), args.n, workers=args.workers
                )
                for row in table.rows:
                    rows.append(
                        {
                            "procedure": row.procedure,
                            "pi0": pi0,
                            "m": m,
                            "q": args.q,
                            "power": row.power,
                            "relative_power": row.relative_power,
                            "bfdr_hat": row.bfdr_hat,
                            "se": row.bfdr_se,
                        }
                    )
        writer.write(rows, "power-heatmap")

    elif args.subcommand == "lfdr-variability":
        rows = []
        for m in parse_list(args.m_list, int):
            for q in parse_grid(args.q_grid):
                sim = _sim_from_args(args, m=m)
                table = run_experiment(
                    sim,
                    build_roster(family, q, args.pi0),
                    args.n,
                    workers=args.workers,
                    compute_lfdr=True,
                )
                for row in table.rows:
                    entry = {"procedure": row.procedure, "m": m, "q": q}
                    entry.update(
                        {
                            k: getattr(row, k)
                            for k in (
                                "true_lfdr_q25", "true_lfdr_median", "true_lfdr_q75",
                                "est_lfdr_q25", "est_lfdr_median", "est_lfdr_q75",
                                "oracle_lfdr_q25", "oracle_lfdr_median", "oracle_lfdr_q75",
                                "pi0_q25", "pi0_median", "pi0_q75",
                            )
                        }
                    )
                    rows.append(entry)
        writer.write(rows, "lfdr-variability")

    elif args.subcommand == "lemmas":
        rows = _lemma_report(args)
        writer.write(rows, "lemmas")

    elif args.subcommand == "asymptotics":
        model = PopulationModel(AltConfig(kind=args.config, pi0=args.pi0))
        limit_rows = []
        for q in parse_list(args.q_list):
            t1, t2 = population_thresholds(model, q)
            limit = boundary_lfdr_limit(model, q)
            bound = q / (1.0 - q)
            limit_rows.append(
                {
                    "config": args.config,
                    "pi0": args.pi0,
                    "q": q,
                    "t1_star": t1,
                    "t2_star": t2,
                    "cdf_at_t1": model.cdf(t1),
                    "limit": limit,
                    "bound": bound,
                    "within_bound": limit <= bound,
                }
            )
        writer.write(limit_rows, "asymptotics-limit")
        probe_rows = convergence_probe(
            model, args.q, parse_list(args.m_list, int), args.n, seed=args.seed
        )
        writer.write(probe_rows, "asymptotics-probe")

    else:
        raise ConfigurationError(f"unknown simulate subcommand {args.subcommand!r}")

    writer.finish(args.seed)
    return 0


def _passes(estimate: MonteCarloEstimate, bound: float) -> bool:
    return estimate.value <= bound + 3.0 * estimate.se


def _lemma_report(args: argparse.Namespace) -> list[dict]:
    rows = []
    rng = np.random.default_rng(args.seed)
    fixed = PValueSample(values=rng.uniform(size=args.m - 1))
    est = uniform_boundary_probability(fixed, args.q, args.n, seed=args.seed + 1)
    target = args.q / args.m
    rows.append(
        {
            "check": "uniform_boundary_probability",
            "params": f"m={args.m},q={args.q}",
            "n": est.n,
            "estimate": est.value,
            "se": est.se,
            "target": target,
            "passed": abs(est.value - target) <= 3.0 * est.se,
        }
    )
    violations, checked = stage1_stability_check(args.n_stability, seed=args.seed)
    rows.append(
        {
            "check": "stage1_stability",
            "params": f"m<=64,trials={args.n_stability}",
            "n": checked,
            "estimate": float(violations),
            "se": 0.0,
            "target": 0.0,
            "passed": violations == 0,
        }
    )
    for pi0 in (0.5, 0.75, 1.0):
        for q in (0.1, 0.2):
            sim = SimConfig(m=args.m, pi0=pi0, kind=args.config, rho=0.0, seed=args.seed)
            est = expectation_bound_check(sim, q, args.n_expectation)
            bound = q / (1.0 - q)
            rows.append(
                {
                    "check": "expectation_bound",
                    "params": f"pi0={pi0},q={q},m={args.m}",
                    "n": est.n,
                    "estimate": est.value,
                    "se": est.se,
                    "target": bound,
                    "passed": _passes(est, bound),
                }
            )
    return rows


# ---------------------------------------------------------------------------
# analyze
# ---------------------------------------------------------------------------

def cmd_analyze(args: argparse.Namespace) -> int:
    writer = RunWriter("analyze", args)
    desc = DatasetDescriptor(
        path=args.input,
        column=args.column,
        sidedness=args.sidedness,
        selection_adjust=args.selection_adjust,
        direction_column=args.direction_column,
    )
    sample = load_pvalues(desc)
    if args.selection_adjust:
        sample = selection_adjust(sample, inclusive=args.inclusive_cutoff)
    if sample.m < 1:
        raise ValidationError("no p-values left to analyze after selection")
    family = _family(args.family)
    ordered = order_sample(sample)
    fit = grenander_fit(sample)
    m = sample.m

    rejection_rows, pi0_rows, lfdr_rows, sellke_rows = [], [], [], []
    for q in parse_list(args.q_list):
        roster = standard_roster(family, q, include_oracle=False)
        for spec in roster:
            r, info = compile_procedure(spec)(ordered.sorted_values)
            outcome = outcome_from_rank(ordered, r, stage_trace=info)
            pi0_used = info["pi0_used"]
            rejection_rows.append(
                {
                    "procedure": spec.name,
                    "q": q,
                    "rejections": r,
                    "percent": percent_of_total(r, m),
                    "threshold": outcome.threshold,
                    "pi0_hat": pi0_used,
                }
            )
            if spec.adjustment is not Adjustment.NONE:
                pi0_rows.append({"procedure": spec.name, "q": q, "pi0_hat": pi0_used})
            for rank in range(1, r + 1):
                idx = int(ordered.permutation[rank - 1])
                p = float(ordered.sorted_values[rank - 1])
                lfdr_rows.append(
                    {
                        "procedure": spec.name,
                        "q": q,
                        "label": sample.labels[idx] if sample.labels else str(idx),
                        "p": p,
                        "est_lfdr": lfdr_hat(pi0_used, fit, p),
                    }
                )
            threshold = outcome.threshold
            row = {
                "procedure": spec.name,
                "q": q,
                "threshold": threshold,
                "alpha": None,
                "alpha_pi0": None,
            }
            if 0.0 < threshold < INV_E:
                row["alpha"] = sellke_alpha(threshold)
                if 0.0 < pi0_used < 1.0:
                    row["alpha_pi0"] = sellke_alpha_pi0(threshold, pi0_used)
            sellke_rows.append(row)

    writer.write(rejection_rows, "analyze-rejections")
    writer.write(pi0_rows, "analyze-pi0")
    writer.write(lfdr_rows, "analyze-lfdr")
    writer.write(sellke_rows, "analyze-sellke")
    meta_rows = [{"key": str(k), "value": str(v)} for k, v in (sample.meta or {}).items()]
    writer.write(meta_rows, "analyze-metadata")
    writer.finish(None)
    return 0


# ---------------------------------------------------------------------------
# calibrate
# ---------------------------------------------------------------------------

def cmd_calibrate(args: argparse.Namespace) -> int:
    writer = RunWriter("calibrate", args)
    grid = parse_grid(args.t_grid)
    kept = [t for t in grid if 0.0 < t < INV_E]
    if len(kept) < len(grid):
        print(
            f"warning: {len(grid) - len(kept)} grid points at or beyond 1/e were clipped",
            file=sys.stderr,
        )
    if not kept:
        raise ValidationError("calibration grid has no points inside (0, 1/e)")
    rows = [
        {
            "t": t,
            "alpha": sellke_alpha(t),
            "alpha_pi0": sellke_alpha_pi0(t, args.pi0_hat),
        }
        for t in kept
    ]
    writer.write(rows, "calibrate-curve")
    cutoff_rows = [{"q": q} for q in parse_list(args.q_list)]
    writer.write(cutoff_rows, "calibrate-cutoffs")
    writer.finish(None)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out-dir", default=None, help="output directory (default: $BOUNDARY_FDR_OUTDIR or .)")
    parser.add_argument("--run-id", default=None, help="stable run id (default: UTC timestamp)")
    parser.add_argument("--seed", type=int, default=1234, help="master seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="boundary-fdr",
        description="Boundary-FDR procedures, Monte Carlo experiments, and dataset analysis",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run Monte Carlo experiments")
    sim.add_argument(
        "subcommand",
        choices=["bfdr-curve", "corr-sweep", "power-heatmap", "lfdr-variability", "lemmas", "asymptotics"],
    )
    sim.add_argument("--config", choices=["alternating", "all_at_5"], default="alternating")
    sim.add_argument("--pi0", type=float, default=0.75)
    sim.add_argument("--m", type=int, default=64)
    sim.add_argument("--q", type=float, default=0.2)
    sim.add_argument("--n", type=int, default=10000, help="Monte Carlo replications")
    sim.add_argument("--family", choices=["sl", "bh"], default="sl")
    sim.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    sim.add_argument("--q-grid", default="0.05:0.4:0.05")
    sim.add_argument("--rho-grid", default="0:1:0.25")
    sim.add_argument("--pi0-list", default="0.25,0.5,0.75")
    sim.add_argument("--m-list", default="16,64,256")
    sim.add_argument("--q-list", default="0.1,0.2,0.3")
    sim.add_argument("--n-stability", type=int, default=100000)
    sim.add_argument("--n-expectation", type=int, default=10000)
    _add_common(sim)
    sim.set_defaults(func=cmd_simulate)

    ana = sub.add_parser("analyze", help="apply the procedures to a p-value dataset")
    ana.add_argument("--input", required=True, help="CSV file with a header row")
    ana.add_argument("--column", default="p", help="p-value column name")
    ana.add_argument("--sidedness", choices=["one_sided", "two_sided"], default="one_sided")
    ana.add_argument("--direction-column", default=None)
    ana.add_argument("--selection-adjust", action="store_true")
    ana.add_argument("--inclusive-cutoff", action="store_true",
                     help="use <= 0.025 instead of < 0.025 in the selection adjustment")
    ana.add_argument("--q-list", default="0.1,0.2,0.3")
    ana.add_argument("--family", choices=["sl", "bh"], default="sl")
    _add_common(ana)
    ana.set_defaults(func=cmd_analyze)

    cal = sub.add_parser("calibrate", help="p-value calibration curves")
    cal.add_argument("--pi0-hat", type=float, default=0.5)
    cal.add_argument("--t-grid", default="0.002:0.36:0.002")
    cal.add_argument("--q-list", default="0.1,0.15,0.2,0.25,0.3")
    _add_common(cal)
    cal.set_defaults(func=cmd_calibrate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, ConfigurationError, NoRootError, DegenerateSolutionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
