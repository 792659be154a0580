"""Command line entry point: ``pde-olo run | verify | bounds``."""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

from ..olo import (
    ALGORITHMS,
    erfi_conjugate_regret_bound,
    erfi_regret_bound,
    exp_regret_bound,
    kt_regret_bound,
)
from ..potentials import v_erfi
from .checks import SUITES, run_suite
from .data import DATASET_ENV, DatasetError, load_dataset, synthetic_regression
from .experiments import (
    TASKS,
    ExperimentConfig,
    LearnerConfig,
    mean_final,
    regret_difference_sweep,
    run_abs1d,
    run_regression,
    run_stochastic1d,
)
from .output import FORMATS, emit_results, sweep_svg

DEFAULT_T = {"abs1d": 500, "stochastic1d": 500, "regression": 50000}
DEFAULT_RUNS = {"abs1d": 1, "stochastic1d": 50, "regression": 5}


def _algs(text: str) -> list[str]:
    names = [a.strip() for a in text.split(",") if a.strip()]
    bad = [a for a in names if a not in ALGORITHMS]
    if bad or not names:
        raise argparse.ArgumentTypeError(
            f"unknown algorithm(s) {', '.join(bad) or '(none)'}; choose from {', '.join(ALGORITHMS)}")
    return names


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pde-olo", description="Parameter-free online learning experiments.")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment and write CSV or SVG results")
    run.add_argument("--task", choices=TASKS, required=True)
    run.add_argument("--T", type=int, help="horizon (defaults: 500, 500, 50000)")
    run.add_argument("--u-star", type=float, help="comparator for abs1d")
    run.add_argument("--u-sweep", type=_floats,
                     help="abs1d: comma-separated u* grid for the KT-minus-erfi regret plot")
    run.add_argument("--gamma", type=float, help="target scale for regression")
    run.add_argument("--algs", type=_algs, default=["erfi", "exp", "kt"])
    run.add_argument("--C", type=float, default=1.0)
    run.add_argument("--eps", type=float, help="KT initial wealth (default sqrt(e) C)")
    run.add_argument("--runs", type=int)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--shuffle", action="store_true", help="regression: shuffle rows per run")
    run.add_argument("--data", type=Path, help=f"regression CSV (else ${DATASET_ENV}, else synthetic)")
    run.add_argument("--out", type=Path, default=Path("results"))
    run.add_argument("--format", choices=FORMATS, default="csv")

    ver = sub.add_parser("verify", help="run invariant checks")
    ver.add_argument("--suite", choices=SUITES + ("all",), default="all")

    bnd = sub.add_parser("bounds", help="tabulate regret bounds")
    bnd.add_argument("--C", type=float, default=1.0)
    bnd.add_argument("--T", type=float, required=True)
    bnd.add_argument("--u", type=_floats, required=True, help="comparator norm(s), comma-separated")
    bnd.add_argument("--eps", type=float, help="KT initial wealth (default sqrt(e) C)")
    return ap


def _load_regression_data(args, T: int):
    path = args.data or os.environ.get(DATASET_ENV)
    if path:
        return load_dataset(path, max_rows=T if not args.shuffle else None), str(path)
    return synthetic_regression(args.seed, T, 90), "synthetic (seeded, d=90)"


def cmd_run(args) -> int:
    T = args.T if args.T is not None else DEFAULT_T[args.task]
    runs = args.runs if args.runs is not None else DEFAULT_RUNS[args.task]
    if args.task == "abs1d" and args.u_star is None:
        raise ValueError("--task abs1d needs --u-star")
    if args.task == "regression" and args.gamma is None:
        raise ValueError("--task regression needs --gamma")
    if args.u_sweep and args.task != "abs1d":
        raise ValueError("--u-sweep only applies to abs1d")
    learners = tuple(LearnerConfig(a, C=args.C, eps=args.eps) for a in args.algs)
    cfg = ExperimentConfig(task=args.task, T=T, u_star=args.u_star, gamma=args.gamma,
                           algorithms=learners, runs=runs, seed=args.seed,
                           output_dir=args.out, shuffle=args.shuffle)
    if args.task == "abs1d":
        records = run_abs1d(cfg)
    elif args.task == "stochastic1d":
        records = run_stochastic1d(cfg)
    else:
        data, source = _load_regression_data(args, T)
        print(f"data: {source}, {data.n} rows, d={data.d}")
        records = run_regression(cfg, data)
    paths = emit_results(records, args.out, args.format, stem=args.task, u_star=args.u_star)
    if args.u_sweep:
        ours = LearnerConfig("erfi", C=args.C)
        base = LearnerConfig("kt", C=args.C, eps=args.eps)
        diffs = regret_difference_sweep(T, args.u_sweep, base, ours)
        p = Path(args.out) / "abs1d_sweep.svg"
        p.write_text(sweep_svg(args.u_sweep, diffs, f"KT regret minus erfi regret, T={T}"))
        paths.append(p)
        for u, d in zip(args.u_sweep, diffs):
            print(f"u*={u:g}  KT - erfi regret = {d:.4f}")
    for alg, v in mean_final(records).items():
        print(f"{alg:>14}  final {records[0].metric_name} = {v:.6g}")
    for p in paths:
        print(f"wrote {p}")
    return 0


def cmd_verify(args) -> int:
    names = SUITES if args.suite == "all" else (args.suite,)
    failed = 0
    for name in names:
        for chk in run_suite(name):
            print(f"[{'PASS' if chk.ok else 'FAIL'}] {name}: {chk.name} ({chk.detail})")
            failed += not chk.ok
    print(f"{failed} check(s) failed" if failed else "all checks passed")
    return 1 if failed else 0


def cmd_bounds(args) -> int:
    C, T = args.C, args.T
    eps = args.eps if args.eps is not None else math.sqrt(math.e) * C
    pot = v_erfi(C)
    print(f"{'u':>10} {'erfi':>14} {'erfi_conjugate':>16} {'exp':>14} {'kt':>14}")
    for u in args.u:
        row = (erfi_regret_bound(C, T, u), erfi_conjugate_regret_bound(pot, T, u),
               exp_regret_bound(C, T, u), kt_regret_bound(eps, T, u))
        print(f"{u:>10g} " + " ".join(f"{v:>{w}.6f}" for v, w in zip(row, (14, 16, 14, 14))))
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args)
        if args.command == "verify":
            return cmd_verify(args)
        return cmd_bounds(args)
    except (DatasetError, FileNotFoundError, ValueError) as exc:
        print(f"pde-olo: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
