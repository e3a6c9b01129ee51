#!/usr/bin/env python3
"""Run bundled scenarios and write their CSV logs and summaries.

Usage: python scripts/run_builtins.py [--out DIR] [names ...]

With no names every bundled scenario runs.  A one-line digest per scenario
is printed; full metrics land in <out>/<name>/<name>_summary.json.
"""

import argparse
import time
import warnings
from pathlib import Path

from geocontact.geodesic import ContractionWarning
from geocontact.scenario import builtin_names, load_scenario, run


def digest(summary: dict) -> str:
    parts = []
    for c in summary["contacts"]:
        if "rejection_time" in c:
            r = c["rejection_time"]
            parts.append("rej=never" if r is None else f"rej={r:.4g}")
        elif "geodesic_residual" in c:
            parts.append(f"res={c['geodesic_residual']:.2e}")
    return " ".join(parts)


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("names", nargs="*", help="bundled scenario names (default: all)")
    p.add_argument("--out", default="out", help="parent output directory")
    args = p.parse_args()
    for name in args.names or builtin_names():
        start = time.perf_counter()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ContractionWarning)
            result = run(load_scenario(name))
        result.write(Path(args.out) / name)
        print(f"{name:26s} {time.perf_counter() - start:6.1f} s  {digest(result.summary.to_dict())}")


if __name__ == "__main__":
    main()
