"""Command-line front end.

Four verbs cover the toolkit:

- ``analytic``: closed-form efficiency table to CSV.
- ``simulate``: one full slot-level run from a config file, JSON report.
- ``sweep``: a simulation per grid point of the config's sweep section,
  CSV of estimates.
- ``calibrate``: measure the delivered-photon probability in-stream and
  report the run with that measured value.

Exit status is 0 on success; 2 for configuration problems (every
violation is listed), 3 for I/O failures, 1 for anything else.  Progress
goes to stderr so written artifacts stay clean.
"""

from __future__ import annotations

import argparse
import json
import sys

from .model import ConfigError
from .pipeline import run_analytic, run_calibrate, run_simulation, run_sweep


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="scenario file (JSON)")
    parser.add_argument("--seed", type=int, default=None, help="override run.seed")
    parser.add_argument("--slots", type=int, default=None, help="override run.slots_per_trial")
    parser.add_argument("--trials", type=int, default=None, help="override run.trials")
    parser.add_argument("--out", default=None, help="write the report/CSV here")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="photondemux",
        description="Simulate and analyze serial-to-parallel conversion of a heralded photon stream.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p_analytic = sub.add_parser("analytic", help="closed-form efficiency table (CSV)")
    p_analytic.add_argument("--n-max", type=int, default=8, help="largest photon number (default 8)")
    p_analytic.add_argument("--eta-sw", type=float, default=1.0,
                            help="composite switching efficiency (default 1.0)")
    p_analytic.add_argument("--out", default=None, help="CSV path (default: stdout)")

    for verb, help_text in (
        ("simulate", "run one scenario end to end (JSON report)"),
        ("sweep", "run every grid point of the scenario's sweep section (CSV)"),
        ("calibrate", "measure the delivered-photon probability in-stream"),
    ):
        p = sub.add_parser(verb, help=help_text)
        _add_run_flags(p)
        if verb == "sweep":
            p.add_argument("--strategy", choices=["heralded", "clocked", "passive"],
                           default=None, help="restrict the sweep to one strategy")
    return parser


def _echo(text: str) -> None:
    print(text, file=sys.stderr)


def _print_rows(rows: list[dict]) -> None:
    if not rows:
        return
    names = list(rows[0])
    print(",".join(names))
    for row in rows:
        print(",".join("" if row[k] is None else str(row[k]) for k in names))


def main(argv: "list[str] | None" = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.verb == "analytic":
            rows = run_analytic(args.n_max, args.eta_sw, out_path=args.out)
            if args.out is None:
                _print_rows(rows)
        elif args.verb == "simulate":
            report = run_simulation(args.config, seed=args.seed, slots=args.slots,
                                    trials=args.trials, out_path=args.out, progress=_echo)
            if args.out is None:
                print(json.dumps(report, sort_keys=True, indent=2))
        elif args.verb == "sweep":
            rows = run_sweep(args.config, out_path=args.out, seed=args.seed,
                             slots=args.slots, trials=args.trials,
                             strategy=args.strategy, progress=_echo)
            if args.out is None:
                _print_rows(rows)
        elif args.verb == "calibrate":
            report = run_calibrate(args.config, seed=args.seed, slots=args.slots,
                                   trials=args.trials, out_path=args.out, progress=_echo)
            if args.out is None:
                print(json.dumps(report, sort_keys=True, indent=2))
    except ConfigError as err:
        for violation in err.violations:
            print(f"error: config: {violation}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"error: io: {err}", file=sys.stderr)
        return 3
    except ValueError as err:
        print(f"error: run: {err}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
