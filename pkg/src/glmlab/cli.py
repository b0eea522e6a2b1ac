"""Command-line interface: simulate, aggregate, report.

Exit codes: 0 on success, 1 for configuration errors, 2 when the run
completed but some jobs recorded failures (error rows in the table).
"""

from __future__ import annotations

import argparse
import sys

from .harness import (ConfigError, DEFAULT_AGGREGATE_KEYS, SimConfig,
                      aggregate, read_records, report, run, write_summary)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_PARTIAL = 2


def _csvlist(text: str) -> tuple:
    return tuple(part.strip() for part in text.split(",") if part.strip())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="glmlab",
        description=("Simulation lab for measuring how GLM likelihood and "
                     "link misspecification affects effect recovery and "
                     "calibration."))
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser(
        "simulate",
        help="run a (possibly reduced) simulation grid and write the "
             "per-model results table")
    sim.add_argument("--domain", default="unit",
                     help="response domain: unit (double-bounded) or "
                          "positive (lower-bounded)")
    sim.add_argument("--dgp-families", type=_csvlist, default=None,
                     metavar="A,B,...",
                     help="data-generating families (default: all for the "
                          "domain; 'transformed_normal' resolves per link)")
    sim.add_argument("--dgp-links", type=_csvlist, default=None,
                     metavar="A,B,...")
    sim.add_argument("--shapes", type=_csvlist, default=None,
                     metavar="A,B,...")
    sim.add_argument("--effects", type=_csvlist, default=None,
                     metavar="A,B,...", help="subset of {zero, positive}")
    sim.add_argument("--fit-families", type=_csvlist, default=None,
                     metavar="A,B,...",
                     help="fit likelihoods (normal+identity baseline is "
                          "always appended)")
    sim.add_argument("--fit-links", type=_csvlist, default=None,
                     metavar="A,B,...")
    sim.add_argument("--formulas", type=_csvlist, default=None,
                     metavar="F1,F2,...",
                     help="subset of {x+z1, x+z1+z2, x+z1+z2+z3}")
    sim.add_argument("--fit-mode", default="wald", choices=("wald", "mcmc"))
    sim.add_argument("--replicates", type=int, default=50, metavar="N")
    sim.add_argument("--n-obs", type=int, default=100, metavar="N")
    sim.add_argument("--seed", type=int, default=20260815, metavar="S",
                     help="master seed; every dataset seed derives from it")
    sim.add_argument("--workers", type=int, default=0, metavar="K",
                     help="worker processes (0 = auto; the GLMLAB_WORKERS "
                          "environment variable overrides)")
    sim.add_argument("--out", default="results.csv", metavar="PATH")
    sim.add_argument("--keep-datasets", action="store_true",
                     help="also write each simulated dataset as CSV")
    sim.add_argument("--quiet", action="store_true")

    agg = sub.add_parser(
        "aggregate", help="summarize a results table by grouping keys")
    agg.add_argument("--in", dest="input", required=True, metavar="PATH")
    agg.add_argument("--by", type=_csvlist,
                     default=DEFAULT_AGGREGATE_KEYS, metavar="K1,K2,...",
                     help="grouping keys (default: "
                          + ",".join(DEFAULT_AGGREGATE_KEYS) + ")")
    agg.add_argument("--out", required=True, metavar="PATH")

    rep = sub.add_parser(
        "report", help="emit the standard report tables from a results table")
    rep.add_argument("--in", dest="input", required=True, metavar="PATH")
    rep.add_argument("--out", required=True, metavar="DIR")
    return parser


def _cmd_simulate(args) -> int:
    config = SimConfig(
        domain=args.domain,
        dgp_families=args.dgp_families or (),
        dgp_links=args.dgp_links or (),
        shapes=args.shapes or (),
        effects=args.effects or ("zero", "positive"),
        fit_families=args.fit_families or (),
        fit_links=args.fit_links or (),
        formulas=args.formulas or ("x+z1", "x+z1+z2", "x+z1+z2+z3"),
        replicates=args.replicates,
        fit_mode=args.fit_mode,
        master_seed=args.seed,
        workers=args.workers,
        output_path=args.out,
        n_obs=args.n_obs,
        keep_datasets=args.keep_datasets,
    )
    records = run(config, echo=not args.quiet)
    n_errors = sum(1 for r in records if r.error is not None)
    if n_errors:
        print(f"warning: {n_errors} of {len(records)} jobs recorded "
              "failures (see the 'error' column)", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def _cmd_aggregate(args) -> int:
    records = read_records(args.input)
    rows = aggregate(records, by=args.by)
    write_summary(rows, args.out)
    print(f"wrote {len(rows)} summary rows to {args.out}")
    return EXIT_OK


def _cmd_report(args) -> int:
    paths = report(args.input, args.out)
    for name in sorted(paths):
        print(f"{name}: {paths[name]}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:            # argparse uses 2 for usage errors
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "aggregate":
            return _cmd_aggregate(args)
        if args.command == "report":
            return _cmd_report(args)
        raise AssertionError(f"unhandled command {args.command!r}")
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
