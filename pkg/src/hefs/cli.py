"""Command-line entry point: ``hefs synth|estimate|mc|compare``.

Exit codes: 0 success, 2 config error, 3 data error, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import math
import sys

from . import io
from .baseline import BaselineConfig
from .errors import (
    DegenerateEnvelopeError,
    FeasibilityError,
    InsufficientDataError,
    InvalidSpecError,
    NumericInputError,
    ParseError,
    ShapeError,
    UnknownFrequencyError,
)
from .pipeline import MonteCarloSpec, compare, monte_carlo, run_hefs
from .signal_model import synthesize

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


def _truth(args):
    return io.load_waveform_spec(args.truth_spec) if args.truth_spec else None


def cmd_synth(args) -> int:
    series = synthesize(io.load_waveform_spec(args.spec))
    io.write_series_csv(series, args.out)
    return EXIT_OK


def cmd_estimate(args) -> int:
    config = io.load_pipeline_config(args.config)
    truth = _truth(args)
    series = io.ingest_csv(args.input)
    report = run_hefs(series, config, truth)
    io.emit_report(report, args.out, args.format)
    if args.trace:
        io.write_trace_csv(report, args.trace)
    return EXIT_OK


def cmd_mc(args) -> int:
    config = io.load_pipeline_config(args.config)
    spec = MonteCarloSpec(args.runs, args.seed, io.load_waveform_spec(args.spec))
    runs = monte_carlo(spec, config, workers=args.workers)
    io.write_mc_csv(runs, args.out)
    failed = [r for r in runs if r.failure]
    for r in failed:
        print(f"run {r.run_id} failed: {r.failure}", file=sys.stderr)
    ok = [r.s_error_pct for r in runs if not r.failure and math.isfinite(r.s_error_pct)]
    if ok:
        print(f"{len(ok)}/{len(runs)} runs ok; mean S error {sum(ok) / len(ok):.4f}%, max {max(ok):.4f}%")
    return EXIT_OK


def cmd_compare(args) -> int:
    config = io.load_pipeline_config(args.config)
    baseline = io.baseline_config_from_dict(io.load_json(args.baseline)) if args.baseline else BaselineConfig()
    truth = _truth(args)
    series = io.ingest_csv(args.input)
    io.emit_report(compare(series, config, baseline, truth), args.out, args.format)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hefs", description="Hybrid H-infinity + ADALINE flicker estimation")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="synthesize a waveform spec to CSV")
    s.add_argument("--spec", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)

    e = sub.add_parser("estimate", help="estimate flicker components of a CSV series")
    e.add_argument("--input", required=True)
    e.add_argument("--config", required=True)
    e.add_argument("--out", required=True)
    e.add_argument("--trace", help="write per-step envelope frames to this CSV")
    e.add_argument("--truth-spec", help="waveform spec of the input, enables error statistics")
    e.add_argument("--format", choices=("json", "csv"), default="json")
    e.set_defaults(func=cmd_estimate)

    m = sub.add_parser("mc", help="run a Monte Carlo campaign")
    m.add_argument("--spec", required=True, help="base waveform spec (harmonic orders, flicker grid, noise, sampling)")
    m.add_argument("--config", required=True)
    m.add_argument("--runs", type=int, required=True)
    m.add_argument("--seed", type=int, required=True)
    m.add_argument("--out", required=True)
    m.add_argument("--workers", type=int, default=1)
    m.set_defaults(func=cmd_mc)

    c = sub.add_parser("compare", help="run HEFS and the spectral baseline side by side")
    c.add_argument("--input", required=True)
    c.add_argument("--config", required=True)
    c.add_argument("--baseline")
    c.add_argument("--out", required=True)
    c.add_argument("--truth-spec")
    c.add_argument("--format", choices=("json", "csv"), default="json")
    c.set_defaults(func=cmd_compare)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InvalidSpecError, UnknownFrequencyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ParseError, InsufficientDataError, ShapeError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (FeasibilityError, DegenerateEnvelopeError, NumericInputError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
