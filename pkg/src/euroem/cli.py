"""Command-line entry points.

    euroem run --config <file> [--out DIR] [--seed N]
    euroem compare --config <file> [--out DIR] [--seed N]
    euroem validate --dataset <dir>

Exit codes: 0 success, 2 validation/config error, 3 solver failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from euroem.cascades import CascadeError
from euroem.dam import MarketError
from euroem.dispatch import DispatchError
from euroem.grid import GridError
from euroem.ltpo import LtpoError
from euroem.model import ValidationError
from euroem.pipeline import ConfigError, RunConfig, run_compare, run_pipeline, validate_dataset
from euroem.redispatch import RedispatchError
from euroem.solver import SolverError

VALIDATION_ERRORS = (ConfigError, ValidationError, CascadeError, FileNotFoundError)
SOLVER_ERRORS = (SolverError, MarketError, DispatchError, LtpoError,
                 RedispatchError, GridError)


def build_parser():
    parser = argparse.ArgumentParser(prog="euroem",
                                     description="Zonal market dispatch and grid-security toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one dispatch model end to end")
    run_p.add_argument("--config", required=True, help="JSON run configuration")
    run_p.add_argument("--out", default=None, help="output directory override")
    run_p.add_argument("--seed", type=int, default=None, help="root seed override")

    cmp_p = sub.add_parser("compare", help="run dam/ed/uc/opf with shared seeds")
    cmp_p.add_argument("--config", required=True)
    cmp_p.add_argument("--out", default=None)
    cmp_p.add_argument("--seed", type=int, default=None)

    val_p = sub.add_parser("validate", help="validate a dataset directory")
    val_p.add_argument("--dataset", required=True)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            summary = validate_dataset(args.dataset)
            print(json.dumps(summary, indent=2, sort_keys=True))
            return 0
        config = RunConfig.from_json(args.config, out_dir=args.out, seed=args.seed)
        if args.command == "run":
            out, report = run_pipeline(config)
        else:
            out, report = run_compare(config)
        print(f"artifacts: {out}")
        return 0
    except VALIDATION_ERRORS as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 2
    except SOLVER_ERRORS as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
