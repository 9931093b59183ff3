"""Command line experiment harness.

Subcommands::

    cscontrol simulate    --config run.toml  [--out DIR]   -> run.json, trace.csv
    cscontrol sweep       --config sweep.toml [--out DIR]  -> sweep.csv
    cscontrol compare     --config run.toml  [--out DIR]   -> compare.csv, compare.json
    cscontrol codec-stats --config run.toml | --run run.json
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import codec
from .config import ConfigError, ExperimentConfig, load_config, load_sweep
from .lift import build_lifted
from .simulate import RunResult, SparseController, compare_truncated, run_closed_loop

CSV_SCHEMAS = """\
CSV schemas (header row after '# config:' comment lines):
  trace.csv    k, err_l2, err_db, sparsity, bytes
               err_db = 20*log10(err_l2), -inf for zero error
  sweep.csv    value, rms_mean, rms_std, sparsity_mean, diverged_fraction
               rms statistics over non-diverged runs (nan if none)
  compare.csv  k, sparsity, err_sparse, err_truncated, err_ridge
               final row 'rms' holds the aggregate rms of each method;
               blank cells after a diverged run stops
"""


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=True)


def _csv_text(rows, header, config: dict) -> str:
    buf = io.StringIO()
    buf.write(f"# config: {_dumps(config)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v) for v in row])
    return buf.getvalue()


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        fh.write(text)


def apply_overrides(exp: ExperimentConfig, args) -> ExperimentConfig:
    run, solver, mu2 = exp.run, exp.solver, exp.mu2
    if args.mu is not None:
        solver = replace(solver, mu=args.mu)
    if args.warm_start is not None:
        solver = replace(solver, warm_start=args.warm_start)
    if args.mu2 is not None:
        mu2 = args.mu2
    kind = args.controller or run.controller.kind
    exp = ExperimentConfig(run=run, solver=solver, mu2=mu2)
    run = exp.with_controller(kind)
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.k is not None:
        changes["K"] = args.k
    if args.periods is not None:
        changes["periods"] = args.periods
    return ExperimentConfig(run=replace(run, **changes), solver=solver, mu2=mu2)


def _summary(result: RunResult) -> str:
    s = f"rms={result.rms:.6g} avg_sparsity={result.avg_sparsity:.4g}"
    if result.diverged:
        s += f" diverged_at={result.diverged_at}"
    return s


def cmd_simulate(args) -> int:
    exp = apply_overrides(load_config(args.config), args)
    result = run_closed_loop(exp.run)
    out = Path(args.out)
    _write(out / "run.json", result.to_json())
    trace = _csv_text(
        ([k, e, db, s, b] for k, (e, db, s, b) in enumerate(
            zip(result.errors, result.errors_db(), result.sparsity, result.bytes_per_period))),
        ["k", "err_l2", "err_db", "sparsity", "bytes"], result.config)
    _write(out / "trace.csv", trace)
    print(_summary(result))
    return 0


def _sweep_point(run):
    r = run_closed_loop(run)
    return r.rms, r.avg_sparsity, r.diverged


def cmd_sweep(args) -> int:
    sweep = load_sweep(args.config, overrides=lambda exp: apply_overrides(exp, args))
    runs = [sweep.point(v, s) for v in sweep.values for s in sweep.seeds]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            points = list(pool.map(_sweep_point, runs))
    else:
        points = [_sweep_point(r) for r in runs]
    rows = []
    n = len(sweep.seeds)
    for i, value in enumerate(sweep.values):
        chunk = points[i * n:(i + 1) * n]
        ok = [p[0] for p in chunk if not p[2]]
        rms_mean = float(np.mean(ok)) if ok else math.nan
        rms_std = float(np.std(ok)) if ok else math.nan
        spars = float(np.mean([p[1] for p in chunk]))
        div = sum(p[2] for p in chunk) / n
        rows.append([value, rms_mean, rms_std, spars, float(div)])
        print(f"{sweep.parameter}={value:g}: rms_mean={rms_mean:.6g} sparsity_mean={spars:.4g} "
              f"diverged_fraction={div:.3g}")
    config = {"parameter": sweep.parameter, "values": list(sweep.values),
              "seeds": list(sweep.seeds), "base": sweep.point(sweep.values[0], sweep.seeds[0]).describe()}
    _write(Path(args.out) / "sweep.csv",
           _csv_text(rows, ["value", "rms_mean", "rms_std", "sparsity_mean", "diverged_fraction"], config))
    return 0


def cmd_compare(args) -> int:
    exp = apply_overrides(load_config(args.config), args)
    lifted = build_lifted(exp.run.plant, exp.run.spec)
    sparse = run_closed_loop(exp.with_controller("sparse"), lifted)
    schedule = list(sparse.sparsity) + [0] * (exp.run.periods - len(sparse.sparsity))
    truncated = compare_truncated(exp.run, schedule, mu2=exp.mu2, lifted=lifted)
    ridge_run = run_closed_loop(exp.with_controller("ridge"), lifted)
    rows = []
    series = [sparse.errors, truncated.errors, ridge_run.errors]
    for k in range(exp.run.periods):
        cells = [s[k] if k < len(s) else None for s in series]
        rows.append([k, schedule[k]] + cells)
    rows.append(["rms", None, sparse.rms, truncated.rms, ridge_run.rms])
    config = {"sparse": sparse.config, "truncated": truncated.config, "ridge": ridge_run.config}
    out = Path(args.out)
    _write(out / "compare.csv",
           _csv_text(rows, ["k", "sparsity", "err_sparse", "err_truncated", "err_ridge"], config))
    summary = {name: {"rms": r.rms, "avg_sparsity": r.avg_sparsity, "diverged": r.diverged,
                      "diverged_at": r.diverged_at}
               for name, r in (("sparse", sparse), ("truncated", truncated), ("ridge", ridge_run))}
    _write(out / "compare.json", json.dumps({"config": config, "summary": summary},
                                            indent=1, sort_keys=True) + "\n")
    for name, r in (("sparse", sparse), ("truncated", truncated), ("ridge", ridge_run)):
        print(f"{name:>9}: {_summary(r)}")
    winner = "sparse" if sparse.rms < truncated.rms else "truncated ridge"
    print(f"winner at matched data size: {winner}")
    return 0


def cmd_codec_stats(args) -> int:
    if args.run:
        doc = json.loads(Path(args.run).read_text())
        N = doc["config"]["basis"]["N"]
        sparsity, sizes = doc["sparsity"], doc["bytes_per_period"]
    else:
        exp = apply_overrides(load_config(args.config), args)
        result = run_closed_loop(exp.run)
        N, sparsity, sizes = result.N, result.sparsity, result.bytes_per_period
    dense = codec.dense_packet_size(N)
    print(f"{'k':>5} {'entries':>8} {'bytes':>7} {'dense':>7} {'ratio':>7}")
    for k, (s, b) in enumerate(zip(sparsity, sizes)):
        print(f"{k:>5} {s:>8} {b:>7} {dense:>7} {b / dense:>7.4f}")
    total = sum(sizes)
    print(f"total bytes {total} vs dense {dense * len(sizes)}; "
          f"compression ratio {total / (dense * len(sizes)):.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="cscontrol", description="Sparse networked control experiments",
        epilog=CSV_SCHEMAS, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config_help):
        sp.add_argument("--config", required=sp.prog.split()[-1] != "codec-stats", help=config_help)
        sp.add_argument("--seed", type=int, help="RNG seed (unsigned 64-bit)")
        sp.add_argument("--out", default=".", help="output directory (default: .)")
        sp.add_argument("--mu", type=float, help="l1 weight of the sparse controller")
        sp.add_argument("--mu2", type=float, help="energy weight of the ridge controller")
        sp.add_argument("--k", type=int, help="random samples per period")
        sp.add_argument("--periods", type=int, help="number of control periods")
        sp.add_argument("--warm-start", action=argparse.BooleanOptionalAction, default=None,
                        help="start FISTA from the previous period's vector")
        sp.add_argument("--controller", choices=["sparse", "ridge"], help="override controller kind")

    for name, fn, helptext in (
        ("simulate", cmd_simulate, "run one closed-loop simulation"),
        ("sweep", cmd_sweep, "sweep mu, mu2 or K over a seed ensemble"),
        ("compare", cmd_compare, "sparse vs truncated ridge vs ridge"),
        ("codec-stats", cmd_codec_stats, "per-period packet sizes"),
    ):
        sp = sub.add_parser(name, help=helptext, description=helptext, epilog=CSV_SCHEMAS,
                            formatter_class=argparse.RawDescriptionHelpFormatter)
        common(sp, "sweep TOML file" if name == "sweep" else "run TOML file")
        if name == "sweep":
            sp.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
        if name == "codec-stats":
            sp.add_argument("--run", help="existing run.json instead of simulating")
        sp.set_defaults(func=fn)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "codec-stats" and not (args.config or args.run):
        print("codec-stats: one of --config or --run is required", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
