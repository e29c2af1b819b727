"""Command-line front end.

Subcommands:

* ``analyze``      -- full pipeline on raw or summary input, writes a report
* ``simulate``     -- run the simulation study grid, writes metrics + plot data
* ``validate``     -- per-segment KS exponentiality check
* ``estimate-pi0`` -- print all pi0 estimates for a summary file

Exit codes: 0 success, 1 input error, 2 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

from .errors import DataFormatError, InvalidParameterError, NumericError
from .pipeline import (
    ESTIMATOR_ALIASES,
    analyze,
    ks_exponentiality,
    load_segments,
    load_summary,
    write_report,
)
from .distributions import substream
from .simulation import SimConfig, run_study


def _parse_floats(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok.strip()]


def _parse_alloc(text: str) -> tuple[int, int]:
    left, _, right = text.partition(":")
    return (int(left), int(right))


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="expfdr",
        description="Exponential-model multiple testing with adaptive FDR control.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="analyze a segmented failure dataset")
    p.add_argument("--input", required=True, help="input file path")
    p.add_argument("--format", choices=("raw", "summary"), default="raw")
    p.add_argument("--theta0", type=float, default=None,
                   help="benchmark null mean (default: grand mean of raw data)")
    p.add_argument("--q", default="0.05,0.1", help="comma-separated FDR levels")
    p.add_argument("--estimator", default="u",
                   choices=sorted(set(ESTIMATOR_ALIASES) | {"all"}))
    p.add_argument("--seed", type=int, default=20240801)
    p.add_argument("--ks-bootstrap", type=int, default=999)
    p.add_argument("--no-validate", action="store_true",
                   help="skip the per-segment exponentiality check (raw input)")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("simulate", help="run the simulation study")
    p.add_argument("--m", type=int, default=100)
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--pi0", default="0.5", help="comma-separated true pi0 values")
    p.add_argument("--setting", choices=("uniform", "exponential"), default="uniform")
    p.add_argument("--alloc", default="50:50", help="poor:better allocation, e.g. 75:25")
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--q", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=20240801)
    p.add_argument("--progress", action="store_true")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("validate", help="KS exponentiality check per segment")
    p.add_argument("--input", required=True)
    p.add_argument("--bootstrap", type=int, default=999)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=20240801)

    p = sub.add_parser("estimate-pi0", help="print pi0 estimates for a summary file")
    p.add_argument("--input", required=True)
    p.add_argument("--seed", type=int, default=20240801)
    return parser


def _cmd_analyze(args) -> int:
    if args.format == "raw":
        segments = load_segments(args.input)
        report = analyze(segments=segments, theta0=args.theta0,
                         q_levels=_parse_floats(args.q), estimator=args.estimator,
                         seed=args.seed, ks_boot=args.ks_bootstrap,
                         validate=not args.no_validate)
    else:
        report = analyze(summary=load_summary(args.input), theta0=args.theta0,
                         q_levels=_parse_floats(args.q), estimator=args.estimator,
                         seed=args.seed)
    files = write_report(report, args.out)
    print(f"theta0 = {report.theta0:.6g}")
    for k, v in report.pi0_estimates.items():
        print(f"pi0[{k}] = {v:.4f}")
    for q in report.q_levels:
        print(f"q={q:g}: {report.n_rejected[q]} rejected "
              f"(non-adaptive: {report.n_rejected_nonadaptive[q]})")
    for f in files:
        print(f"wrote {f}")
    return 0


def _cmd_simulate(args) -> int:
    configs = [
        SimConfig(m=args.m, n=args.n, pi0=pi0, setting=args.setting,
                  allocation=_parse_alloc(args.alloc), n_reps=args.reps,
                  seed=args.seed, q=args.q)
        for pi0 in _parse_floats(args.pi0)
    ]
    rows = run_study(configs, progress=args.progress)
    os.makedirs(os.path.join(args.out, "plots"), exist_ok=True)

    metrics_path = os.path.join(args.out, "metrics.csv")
    fields = ["m", "n", "pi0", "setting", "allocation", "n_reps", "q", "estimator",
              "mean_estimate", "bias", "mse", "power", "rejection_rate", "fdr",
              "power_nonadaptive", "rejection_rate_nonadaptive", "fdr_nonadaptive"]
    with open(metrics_path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(fields)
        for r in rows:
            w.writerow([getattr(r, f) if f != "allocation"
                        else f"{r.allocation[0]}:{r.allocation[1]}" for f in fields])

    curve_path = os.path.join(args.out, "plots", "power_curve.csv")
    with open(curve_path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["pi0", "estimator", "power", "power_nonadaptive"])
        for r in rows:
            w.writerow([r.pi0, r.estimator, f"{r.power:.15g}",
                        f"{r.power_nonadaptive:.15g}"])

    for r in rows:
        print(f"pi0={r.pi0:g} {r.estimator}: mse={r.mse:.5f} bias={r.bias:.5f} "
              f"power={r.power:.5f} fdr={r.fdr:.4f}")
    print(f"wrote {metrics_path}")
    print(f"wrote {curve_path}")
    return 0


def _cmd_validate(args) -> int:
    segments = load_segments(args.input)
    n_fail = 0
    for i, seg in enumerate(segments):
        p = ks_exponentiality(seg.samples, n_boot=args.bootstrap,
                              rng=substream(args.seed, "ks", i))
        flag = ""
        if p < args.alpha:
            n_fail += 1
            flag = f"  REJECT at {args.alpha:g}"
        print(f"segment {seg.segment_id}: n={seg.samples.size} ks_pvalue={p:.4f}{flag}")
    print(f"{n_fail}/{len(segments)} segments fail exponentiality at level {args.alpha:g}")
    return 0


def _cmd_estimate_pi0(args) -> int:
    report = analyze(summary=load_summary(args.input), seed=args.seed,
                     estimator="all")
    for k, v in report.pi0_estimates.items():
        print(f"pi0[{k}] = {v:.4f}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "analyze": _cmd_analyze,
        "simulate": _cmd_simulate,
        "validate": _cmd_validate,
        "estimate-pi0": _cmd_estimate_pi0,
    }
    try:
        return handlers[args.command](args)
    except (DataFormatError, FileNotFoundError, InvalidParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (NumericError, FloatingPointError, OverflowError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
