"""Command-line entry points: run experiments, print bound reports, compare allocators."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .harness import ConfigError, ExperimentConfig, emit_bounds_report, parse_config, run_experiment


def _add_overrides(parser: argparse.ArgumentParser):
    parser.add_argument("config", help="flat key = value config file")
    parser.add_argument("--seed", type=int, default=None, help="override base_seed")
    parser.add_argument("--repeats", type=int, default=None, help="override repeats")
    parser.add_argument("--out", default=None, help="override output directory")


def _load(args) -> ExperimentConfig:
    config = parse_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["base_seed"] = args.seed
    if args.repeats is not None:
        overrides["repeats"] = args.repeats
    if args.out is not None:
        overrides["out"] = args.out
    if overrides:
        config = dataclasses.replace(config, **overrides)
    return config


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fmab",
        description="Budget allocation across rate-certified optimizers: experiments and bounds.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("run", "run the configured experiment and write its artifacts"),
        ("bounds", "print the bound calculators' values as JSON"),
        ("compare", "run the allocator comparison and print the rank table"),
    ):
        _add_overrides(sub.add_parser(name, help=text))
    args = parser.parse_args(argv)
    try:
        config = _load(args)
        if args.command == "bounds":
            report = emit_bounds_report(config)
            print(json.dumps(report, indent=2, sort_keys=True))
        elif args.command == "compare":
            if config.experiment != "baseline_compare":
                config = dataclasses.replace(config, experiment="baseline_compare")
            stats = run_experiment(config)
            print(json.dumps(stats.rank_table, indent=2, sort_keys=True))
        else:
            stats = run_experiment(config)
            doc = stats.to_dict()
            doc.pop("per_repeat", None)
            print(json.dumps(doc, indent=2, sort_keys=True))
    except (ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
