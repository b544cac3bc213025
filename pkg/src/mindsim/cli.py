"""Command-line interface for the experiment pipeline.

Subcommands: synth-gen, collect, identify, compare, report, run-all.
Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .errors import DataError, NumericalError, StabilityError, StructuralError
from .pipeline import (ExperimentConfig, run_all, run_collect, run_compare, run_identify,
                       run_report, run_synth_gen, write_manifest)
from .serialize import load_json


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(1)


def build_parser() -> _Parser:
    parser = _Parser(prog="mindsim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("synth-gen", "collect", "identify", "compare", "report", "run-all"):
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, default=None,
                       help="experiment config JSON (defaults are used when omitted)")
        p.add_argument("--seed", type=int, default=None, help="override the root seed")
        p.add_argument("--out", type=Path, default=Path("mindsim-out"),
                       help="output directory")
        p.add_argument("--approach", choices=("conventional", "a", "b"), default=None,
                       help="restrict identification to one approach")
        p.add_argument("--participants", type=int, default=None,
                       help="override the cohort size")
        p.add_argument("--jobs", type=int, default=None,
                       help="parallel per-participant workers")
    return parser


def load_config(args) -> ExperimentConfig:
    if args.config is not None:
        if not args.config.exists():
            print(f"mindsim: config file not found: {args.config}", file=sys.stderr)
            sys.exit(1)
        config = ExperimentConfig.from_dict(load_json(args.config))
    else:
        config = ExperimentConfig()
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    if args.participants is not None:
        config = replace(config, cohort=args.participants)
    if args.jobs is not None:
        config = replace(config, jobs=args.jobs)
    if args.approach is not None:
        config = replace(config, approaches=(args.approach,),
                         compare_approach=args.approach)
    return config


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args)
        out = args.out
        if args.command == "synth-gen":
            run_synth_gen(config, out)
        elif args.command == "collect":
            run_collect(config, out)
        elif args.command == "identify":
            run_identify(config, out)
        elif args.command == "compare":
            run_compare(config, out)
        elif args.command == "report":
            run_report(config, out)
        elif args.command == "run-all":
            run_all(config, out)
            return 0
        if args.command != "synth-gen":
            # refresh the manifest when a later step reran on an existing tree
            if (Path(out) / "manifest.json").exists():
                write_manifest(config, out)
    except (DataError, StructuralError) as exc:
        print(f"mindsim: data error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, StabilityError) as exc:
        print(f"mindsim: numerical failure: {exc}", file=sys.stderr)
        return 3
    except FileNotFoundError as exc:
        print(f"mindsim: missing input: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
