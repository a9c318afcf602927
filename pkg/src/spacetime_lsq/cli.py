"""Command line front-end for the benchmark experiments."""

from __future__ import annotations

import argparse
import sys

from .bench import ExperimentConfig, fit_order, read_records, run
from .pde import OracleValidationError


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="spacetime-lsq",
        description="Run spectral-in-time least-squares benchmark experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment from a JSON config")
    p_run.add_argument("--config", required=True, help="path to JSON config")
    p_run.add_argument("--out", default=None, help="output directory (default: config 'out' or '.')")
    p_run.add_argument(
        "--paper-scale",
        action="store_true",
        help="merge the config's paper_scale overrides before running",
    )

    p_fit = sub.add_parser("fit", help="fit a convergence order from a results CSV")
    p_fit.add_argument("--csv", required=True, help="path to a results CSV")
    p_fit.add_argument("--method", default=None, help="restrict the fit to one method column")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            config = ExperimentConfig.from_json(args.config, paper_scale=args.paper_scale)
            records = run(config, out_dir=args.out)
            print(f"{config.experiment.value}: {len(records)} records written")
        else:
            order = fit_order(read_records(args.csv), method=args.method)
            print(f"order {order:.3f}")
    except OracleValidationError as exc:
        print(f"reference validation failed: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # argparse handles its own exits
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
