"""Command-line entry point: ``geocontact run | validate | list-builtin``.

Exit codes: 0 success, 1 scenario or validation error, 2 numerical failure.
The output directory is taken from --out, then $GEOCONTACT_OUT (one
subdirectory per scenario), then the scenario file, then ./out/<name>.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from dataclasses import replace
from typing import Optional, Sequence

from .errors import GeoContactError, IntegrationError, ScenarioError
from .geodesic import ContractionWarning
from .scenario import builtin_names, load_scenario, resolve_output_dir, run

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2

log = logging.getLogger("geocontact")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="geocontact", description="Geodesic contact-curve scenarios")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a scenario file or bundled scenario and write its logs")
    r.add_argument("scenario", help="path to a .toml file or a bundled scenario name")
    r.add_argument("--out", help="output directory (overrides $GEOCONTACT_OUT and the file)")
    r.add_argument("--step", type=float, help="override the integrator step [s]")
    r.add_argument("--seed", type=int,
                   help="recorded in the summary; every bundled model is deterministic")

    v = sub.add_parser("validate", help="parse and validate scenario files without running them")
    v.add_argument("scenarios", nargs="+")

    sub.add_parser("list-builtin", help="list bundled scenario names")
    return p


def _cmd_run(args) -> int:
    scenario = load_scenario(args.scenario)
    if args.step is not None:
        if not args.step > 0:
            raise ScenarioError(f"must be positive, got {args.step}", "--step")
        scenario = replace(scenario, step=args.step)
    out_dir = resolve_output_dir(scenario, args.out)
    log.info("running %s (%s mode) -> %s", scenario.name, scenario.mode, out_dir)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ContractionWarning)  # reported in the summary instead
        result = run(scenario)
    if args.seed is not None:
        result.summary.extra["seed"] = args.seed
    for path in result.write(out_dir):
        log.info("wrote %s", path)
    print(json.dumps(result.summary.to_dict(), indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_validate(args) -> int:
    status = EXIT_OK
    for item in args.scenarios:
        try:
            s = load_scenario(item)
        except ScenarioError as exc:
            print(f"{item}: invalid: {exc}", file=sys.stderr)
            status = EXIT_INVALID
        else:
            print(f"{item}: ok ({s.name}, {s.mode} mode, {len(s.contacts)} contact(s))")
    return status


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.command == "list-builtin":
            for name in builtin_names():
                print(name)
            return EXIT_OK
        if args.command == "validate":
            return _cmd_validate(args)
        return _cmd_run(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (IntegrationError, GeoContactError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
