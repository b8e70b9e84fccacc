"""Command-line front end: train, sweep, diagnose, bench-match.

All outputs are plot-ready CSV/JSON with stable headers; plotting itself is
left to external tools. Exit codes: 0 success, 1 configuration error,
2 runtime/numeric error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, assignment, config as cfg, trainer
from .data import SyntheticSpec, load_csv, sample_conditional_targets, sample_synthetic
from .diagnostics import TRAJECTORY_HEADER, critical_temperature
from .errors import ConfigError, DegenerateInputError, NumericError
from .numerics import make_rng

EVAL_HEADER = (
    "hard_distortion,soft_distortion,rmse,entropy,free_energy,rate_bits,"
    "n_samples,temperature"
)

DIAG_HEADER = "x,lambda_max,critical_temperature,d_max,n_samples"

BENCH_HEADER = (
    "m,n,trials,mcl_time,hungarian_time,exhaustive_time,"
    "mcl_loss_mean,pit_loss_mean,exhaustive_included"
)


def _out_dir(args, raw) -> Path:
    if args.out:
        return Path(args.out)
    if "output" in raw and "directory" in raw["output"]:
        return Path(raw["output"]["directory"])
    root = os.environ.get("AMCL_OUT_ROOT", "runs")
    return Path(root) / time.strftime("%Y%m%d-%H%M%S")


def _load_with_overrides(args) -> dict:
    raw = cfg.load_config(args.config)
    for spec in args.override or []:
        cfg.apply_override(raw, spec)
    if args.seed is not None:
        cfg.apply_override(raw, f"run.seed={args.seed}")
    return raw


def _write_eval(path, report):
    with open(path, "w", encoding="utf-8") as f:
        f.write(EVAL_HEADER + "\n")
        f.write(
            f"{report.hard_distortion!r},{report.soft_distortion!r},{report.rmse!r},"
            f"{report.entropy!r},{report.free_energy!r},{report.rate_bits!r},"
            f"{report.n_samples},{report.temperature!r}\n"
        )


def run_train(raw: dict, out: Path) -> None:
    """Execute one training run and write its four artifacts into `out`."""
    train_config = cfg.build_train_config(raw)
    train_data = validation = None
    data = raw.get("data", {})
    if data.get("kind") == "csv":
        if "path" not in data or "target_columns" not in data:
            raise ConfigError("[data] csv runs need 'path' and 'target_columns'")
        train_data, validation = load_csv(
            data["path"], data["target_columns"], cfg.build_fold_spec(raw)
        )
    out.mkdir(parents=True, exist_ok=True)
    start = time.monotonic()
    bank, points = trainer.train(train_config, train_data, validation)
    wall = time.monotonic() - start
    with open(out / "trajectory.csv", "w", encoding="utf-8") as f:
        f.write(TRAJECTORY_HEADER + "\n")
        for p in points:
            f.write(p.csv_row() + "\n")
    eval_data = validation if validation is not None else None
    if eval_data is None:
        rng = make_rng(train_config.seed + 2_000_003)
        eval_data = sample_synthetic(train_config.dataset, train_config.validation_size, rng)
    final_t = points[-1].temperature if points else None
    report = trainer.evaluate(bank, eval_data, final_t if final_t else None)
    _write_eval(out / "eval.csv", report)
    bank.save(out / "checkpoint.npz")
    manifest = {
        "version": __version__,
        "config": raw,
        "seed": train_config.seed,
        "wall_time_s": wall,
    }
    with open(out / "manifest.json", "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2)


def cmd_train(args) -> int:
    raw = _load_with_overrides(args)
    run_train(raw, _out_dir(args, raw))
    return 0


def cmd_sweep(args) -> int:
    raw = _load_with_overrides(args)
    if not args.values:
        raise ConfigError("sweep needs a non-empty value list")
    out = _out_dir(args, raw)
    out.mkdir(parents=True, exist_ok=True)
    rows, failed = [], 0
    for value in args.values:
        run_raw = json.loads(json.dumps(raw))  # deep copy
        if args.axis == "seed":
            cfg.apply_override(run_raw, f"run.seed={int(value)}")
        else:  # T0
            cfg.apply_override(run_raw, f"schedule.t0={float(value)}")
        run_dir = out / f"{args.axis}_{value}"
        try:
            run_train(run_raw, run_dir)
        except Exception as e:  # record per-run failure, keep sweeping
            print(f"run {run_dir.name} failed: {e}", file=sys.stderr)
            rows.append((value, "failed"))
            failed += 1
            continue
        with open(run_dir / "eval.csv", encoding="utf-8") as f:
            rows.append((value, f.readlines()[1].strip()))
    with open(out / "summary.csv", "w", encoding="utf-8") as f:
        f.write(f"{args.axis},{EVAL_HEADER}\n")
        for value, row in rows:
            f.write(f"{value},{row}\n")
    return 2 if failed else 0


def cmd_diagnose(args) -> int:
    raw = _load_with_overrides(args)
    data = raw.get("data", {})
    diag = raw.get("diagnostics", {})
    spec = SyntheticSpec(
        kind=data.get("kind", "conditional_three_gaussians"),
        sigma=data.get("sigma", 0.1),
    )
    probes = diag.get("probe_grid", [round(0.1 * i, 1) for i in range(11)])
    samples = diag.get("samples_per_probe", 1000)
    out = _out_dir(args, raw)
    out.mkdir(parents=True, exist_ok=True)
    rng = make_rng(raw.get("run", {}).get("seed", 0))
    rows, sup_lambda = [], 0.0
    for x in probes:
        if samples < 2:
            print(f"probe x={x}: fewer than 2 samples, skipped", file=sys.stderr)
            continue
        y = sample_conditional_targets(spec, float(x), samples, rng)
        try:
            report = critical_temperature(y)
        except DegenerateInputError as e:
            print(f"probe x={x} skipped: {e}", file=sys.stderr)
            continue
        sup_lambda = max(sup_lambda, report.lambda_max)
        rows.append(
            f"{x},{report.lambda_max!r},{report.critical_temperature!r},"
            f"{report.d_max!r},{report.n_samples}"
        )
    with open(out / "diagnostics.csv", "w", encoding="utf-8") as f:
        f.write(DIAG_HEADER + "\n")
        for row in rows:
            f.write(row + "\n")
    with open(out / "global_bound.json", "w", encoding="utf-8") as f:
        json.dump({"critical_temperature_upper_bound": 2.0 * sup_lambda}, f)
    print(f"global bound 2*sup_x lambda_max = {2.0 * sup_lambda:.6f}")
    return 0


def cmd_bench_match(args) -> int:
    if any(m < 1 for m in args.m):
        raise ConfigError("m values must be >= 1")
    out = Path(args.out) if args.out else Path(os.environ.get("AMCL_OUT_ROOT", "runs"))
    out.mkdir(parents=True, exist_ok=True)
    rng = make_rng(args.seed if args.seed is not None else 0)
    rows = []
    for m in args.m:
        for n in args.n or [m]:
            if n < m:
                print(f"skipping n={n} < m={m}", file=sys.stderr)
                continue
            include_exhaustive = m <= assignment.EXHAUSTIVE_LIMIT
            preds = rng.standard_normal((args.trials, n, 2))
            tgts = rng.standard_normal((args.trials, m, 2))
            t0 = time.perf_counter()
            mcl_vals = [
                assignment.mcl_match_loss(preds[i], tgts[i]) for i in range(args.trials)
            ]
            t_mcl = time.perf_counter() - t0
            t_hung = t_exh = float("nan")
            pit_vals = []
            if n == m:
                t0 = time.perf_counter()
                pit_vals = [
                    assignment.pit_loss(preds[i], tgts[i], mode="hungarian")[0]
                    for i in range(args.trials)
                ]
                t_hung = time.perf_counter() - t0
                if include_exhaustive:
                    t0 = time.perf_counter()
                    for i in range(args.trials):
                        assignment.pit_loss(preds[i], tgts[i], mode="exhaustive")
                    t_exh = time.perf_counter() - t0
                else:
                    print(f"m={m}: exhaustive enumeration skipped", file=sys.stderr)
            rows.append(
                f"{m},{n},{args.trials},{t_mcl!r},{t_hung!r},{t_exh!r},"
                f"{float(np.mean(mcl_vals))!r},"
                f"{float(np.mean(pit_vals)) if pit_vals else float('nan')!r},"
                f"{int(include_exhaustive and n == m)}"
            )
    with open(out / "bench_match.csv", "w", encoding="utf-8") as f:
        f.write(BENCH_HEADER + "\n")
        for row in rows:
            f.write(row + "\n")
    print(f"wrote {out / 'bench_match.csv'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="amcl")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="TOML config or JSON manifest")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None)
        p.add_argument(
            "--override", action="append", metavar="SECTION.KEY=VALUE", default=[]
        )

    common(sub.add_parser("train", help="run one training experiment"))
    p_sweep = sub.add_parser("sweep", help="run one training per axis value")
    common(p_sweep)
    p_sweep.add_argument("--axis", choices=("seed", "T0"), required=True)
    p_sweep.add_argument("--values", nargs="*", default=[])
    common(sub.add_parser("diagnose", help="critical temperatures over a probe grid"))
    p_bench = sub.add_parser("bench-match", help="set-matching loss benchmark")
    p_bench.add_argument("--m", type=int, nargs="+", required=True)
    p_bench.add_argument("--n", type=int, nargs="*", default=None)
    p_bench.add_argument("--trials", type=int, default=100)
    p_bench.add_argument("--seed", type=int, default=None)
    p_bench.add_argument("--out", default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "train": cmd_train,
        "sweep": cmd_sweep,
        "diagnose": cmd_diagnose,
        "bench-match": cmd_bench_match,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1
    except (NumericError, ArithmeticError, RuntimeError, OSError, ValueError) as e:
        print(f"runtime error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
