"""Command-line entry point.

Subcommands: equiv, approx, bench, train, oracle.  Exit code is 0 only if
every asserted tolerance of the selected suite passes.
"""

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .harness import (ExperimentConfig, run_approximation_report,
                      run_complexity_benchmark, run_equivalence_suite,
                      run_online_training, run_oracle_suite)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="rnngrad",
        description="Verification harness for the recurrent gradient engines")
    parser.add_argument("--config", type=Path, help="JSON experiment config")
    parser.add_argument("--seed", type=int, help="override config seeds")
    parser.add_argument("--out", type=Path, help="output file path")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    sub = parser.add_subparsers(dest="command", required=True)
    equiv = sub.add_parser("equiv", help="pairwise algorithm equivalences")
    equiv.add_argument("--self-test", action="store_true",
                       help="flip one Jacobian sign; the suite must fail")
    sub.add_parser("approx", help="m-order approximation error curves")
    sub.add_parser("bench", help="complexity scaling benchmark")
    sub.add_parser("train", help="online vs offline update comparison")
    sub.add_parser("oracle", help="incremental vs definitional trace checks")
    return parser


def load_config(args):
    if args.config is not None:
        config = ExperimentConfig.from_json(args.config.read_text())
    else:
        config = ExperimentConfig()
    if args.seed is not None:
        config = replace(config, seeds=(args.seed,))
    if args.out is not None:
        config = replace(config, out=str(args.out))
    return config


def main(argv=None):
    args = build_parser().parse_args(argv)
    config = load_config(args)

    if args.command == "equiv":
        result = run_equivalence_suite(config,
                                       mutate_jacobian=args.self_test)
        if args.self_test:
            # self-test succeeds exactly when the mutated suite fails
            ok = not result.passed
            print("mutation self-test:", "pass" if ok else "FAIL")
            return 0 if ok else 1
    elif args.command == "approx":
        result = run_approximation_report(config)
    elif args.command == "bench":
        result = run_complexity_benchmark(config)
    elif args.command == "train":
        result = run_online_training(config)
    elif args.command == "oracle":
        result = run_oracle_suite(config, instances=config.trials)
    else:  # pragma: no cover
        raise AssertionError(args.command)

    if config.out:
        if args.format == "json":
            result.to_json(config.out)
        else:
            result.to_csv(config.out)
        print(f"wrote {config.out}")
    for key, value in sorted(result.summary.items()):
        print(f"{key}: {value}")
    print(f"{result.kind}: {'pass' if result.passed else 'FAIL'} "
          f"({len(result.rows)} rows)")
    return 0 if result.passed else 1


if __name__ == "__main__":
    sys.exit(main())
