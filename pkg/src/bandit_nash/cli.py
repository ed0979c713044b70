"""Command-line entry point: ``bandit-nash {run,summarize,diagnose,validate-schedule}``."""

from __future__ import annotations

import argparse
import sys

from .exceptions import InfeasibleSetError, NotMonotoneError, ScheduleValidationError, UsageError
from .experiment import OUTPUT_DIR_ENV, diagnose, run_experiment, summarize, write_summary
from .schedules import validate_exponents
from .suites import SUITES


def _parser():
    p = argparse.ArgumentParser(prog="bandit-nash", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment config")
    r.add_argument("config")
    r.add_argument("--output-dir", help=f"override output_dir (also via ${OUTPUT_DIR_ENV})")
    r.add_argument("--workers", type=int, default=None, help="processes for the seed sweep")

    s = sub.add_parser("summarize", help="cross-seed statistics of trace CSVs")
    s.add_argument("glob")
    s.add_argument("-o", "--output", required=True)

    d = sub.add_parser("diagnose", help="run a diagnostic suite")
    d.add_argument("suite", choices=sorted(SUITES))
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--output-dir")

    v = sub.add_parser("validate-schedule", help="check schedule exponents")
    for k in ("a1", "a2", "a3", "a4"):
        v.add_argument(f"--{k}", required=True, help="decimal or fraction such as 5/9")
    v.add_argument("--mode", choices=("full", "deterministic"), default="full")
    v.add_argument("--free-sets", action="store_true")
    return p


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        if args.command == "run":
            res = run_experiment(args.config, output_dir=args.output_dir, workers=args.workers)
            for path in res.trace_paths:
                print(path)
            print(res.summary_path)
            for seed, msg in res.aborted.items():
                print(f"seed {seed} aborted: {msg}", file=sys.stderr)
            return 0
        if args.command == "summarize":
            stats = summarize(args.glob)
            write_summary(args.output, stats)
            print(args.output)
            return 0
        if args.command == "diagnose":
            path, rows = diagnose(args.suite, args.seed, args.output_dir)
            for r in rows:
                print(f"{'pass' if r.passed else 'FAIL'}  {r.check}: {r.measured:.6g} (threshold {r.threshold:.6g})")
            print(path)
            return 0 if all(r.passed for r in rows) else 1
        if args.command == "validate-schedule":
            rep = validate_exponents(args.a1, args.a2, args.a3, args.a4, mode=args.mode,
                                     free_sets=args.free_sets)
            print("\n".join(rep.lines()))
            if not rep.valid():
                print(rep.failure_message(), file=sys.stderr)
                return 1
            return 0
    except ScheduleValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (UsageError, InfeasibleSetError, NotMonotoneError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
