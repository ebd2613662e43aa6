"""Command-line entry point: ``fdpn figure | run | compare``."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import analytic, experiments
from .coupling import InfeasibleAlc, InfeasibleSeparation
from .simulator import analytic_spectra, run_monte_carlo


def _spectrum_path(out: Path, preset: str, oscillator: str) -> Path:
    return out.with_name(f"{out.stem}_{preset}_{oscillator}{out.suffix or '.csv'}")


def _cmd_figure(args: argparse.Namespace) -> int:
    spec = experiments.preset(args.name)
    trials = 0 if args.analytic_only else args.trials
    result = experiments.run_sweep(spec, trials, args.seed, args.workers)
    out = Path(args.out or f"{args.name}.csv")
    experiments.emit_csv(result, out)
    written = [out]
    for (_, preset, osc), spectrum in sorted(result.spectra.items()):
        path = _spectrum_path(out, preset, osc)
        experiments.emit_csv(spectrum, path)
        written.append(path)
    for path in written:
        print(f"wrote {path}")
    if args.name == "fig10":
        for row in result.rows:
            total = row.total_suppression_db()
            if total is not None:
                print(f"{row.oscillator:>11} {row.axis_value:8.3f} m: total suppression {total:.2f} dB")
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = experiments.load_config(args.config)
    if args.trials is not None:
        cfg = replace(cfg, trials=args.trials)
    if args.seed is not None:
        cfg = replace(cfg, master_seed=args.seed)
    try:
        _, post = analytic_spectra(cfg)
    except (InfeasibleAlc, InfeasibleSeparation) as exc:
        print(f"infeasible scenario: {exc}", file=sys.stderr)
        return 2
    mc = None if args.analytic_only else run_monte_carlo(cfg, workers=args.workers)
    spectrum = experiments.SpectrumResult(post, mc, cfg.waveform.n_subcarriers)
    out = Path(args.out or Path(args.config).with_suffix(".csv").name)
    experiments.emit_csv(spectrum, out)
    print(f"analytic inband: {analytic.inband_average(post, cfg.waveform.active_set):.3f} dB")
    if mc is not None:
        print(f"simulated inband: {mc.inband_db():.3f} +/- {mc.inband_stderr_db():.3f} dB ({mc.trials_run} trials)")
    print(f"wrote {out}")
    return 0


def _cmd_compare(args: argparse.Namespace) -> int:
    path = Path(args.input)
    with open(path, encoding="utf-8") as fh:
        header = tuple(fh.readline().strip().split(","))
    try:
        if header == experiments.SPECTRUM_HEADER:
            print(experiments.compare_spectrum_csv(path, args.active_per_side))
        elif header == experiments.SWEEP_HEADER:
            print(experiments.compare_report(experiments.read_sweep_csv(path)))
        else:
            print(f"{path}: unrecognized CSV header", file=sys.stderr)
            return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fdpn", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    fig = sub.add_parser("figure", help="run a figure preset sweep and write CSV")
    fig.add_argument("name", choices=experiments.PRESET_NAMES)
    fig.add_argument("--trials", type=int, default=1000)
    fig.add_argument("--seed", type=int, default=0)
    fig.add_argument("--out", help="sweep CSV path (default: <name>.csv)")
    fig.add_argument("--analytic-only", action="store_true")
    fig.add_argument("--workers", type=int, default=1)
    fig.set_defaults(func=_cmd_figure)

    run = sub.add_parser("run", help="evaluate a JSON scenario and write its spectrum CSV")
    run.add_argument("--config", required=True)
    run.add_argument("--trials", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--out")
    run.add_argument("--analytic-only", action="store_true")
    run.add_argument("--workers", type=int, default=1)
    run.set_defaults(func=_cmd_run)

    cmp_ = sub.add_parser("compare", help="summarize analytic vs simulated columns of a CSV")
    cmp_.add_argument("--in", dest="input", required=True)
    cmp_.add_argument("--active-per-side", type=int, default=300)
    cmp_.set_defaults(func=_cmd_compare)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "trials", None) is not None and args.trials < 0:
        print("error: --trials must be >= 0", file=sys.stderr)
        return 2
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
