"""Command-line front end.

    seqbell run --config scenario.json [--out DIR] [--format csv|json]
                [--seed N] [--samples N]

Exit codes: 0 success, 1 configuration error, 2 runtime error.
"""
from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from ._version import __version__
from .runner import ConfigError, ScenarioError, emit_report, load_config, run_scenario


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seqbell",
        description="Sequential single-photon Bell-test simulator",
    )
    parser.add_argument("--version", action="version", version=f"seqbell {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a scenario from a JSON config")
    run.add_argument("--config", required=True, help="path to a JSON scenario config")
    run.add_argument("--out", default=".", help="output directory (default: .)")
    run.add_argument("--format", choices=("csv", "json"), help="override output format")
    run.add_argument("--seed", type=int, help="override the run seed")
    run.add_argument("--samples", type=int, help="override the sample count (0 = exact only)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 1
    try:
        config = load_config(text)
        overrides = {}
        if args.format is not None:
            overrides["output_format"] = args.format
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("seed must be an unsigned integer")
            overrides["seed"] = args.seed
        if args.samples is not None:
            if args.samples < 0:
                raise ConfigError("samples must be >= 0")
            overrides["samples"] = args.samples
        if overrides:
            config = dataclasses.replace(config, **overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        report = run_scenario(config)
        paths = emit_report(report, config.output_format, args.out)
    except (ScenarioError, OSError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2
    for path in paths:
        print(path)
    for key, value in sorted(report.verdicts.items()):
        shown = f"{value:.12g}" if isinstance(value, float) else value
        print(f"{key}: {shown}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
