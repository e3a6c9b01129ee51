#!/usr/bin/env python3
"""Plot slip speed (and tangential force, if logged) from contact CSV logs.

Usage: python scripts/plot_logs.py out/sphere_eta100 [--save fig.png]

Needs matplotlib (``pip install geocontact[plot]``).
"""

import argparse
from pathlib import Path

import numpy as np


def load(path: Path):
    with path.open() as fh:
        columns = fh.readline().strip().split(",")
    return columns, np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def main():
    import matplotlib.pyplot as plt

    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("directory", type=Path)
    p.add_argument("--save", type=Path, help="write the figure instead of showing it")
    args = p.parse_args()

    logs = sorted(args.directory.glob("*_contact*.csv"))
    if not logs:
        raise SystemExit(f"no contact logs in {args.directory}")
    has_force = "f_tx" in load(logs[0])[0]
    fig, axes = plt.subplots(2 if has_force else 1, 1, sharex=True, squeeze=False)
    for path in logs:
        cols, data = load(path)
        t = data[:, cols.index("t")]
        label = path.stem.rsplit("_", 1)[-1]
        slip = np.hypot(data[:, cols.index("v_rel_x")], data[:, cols.index("v_rel_y")])
        axes[0, 0].semilogy(t, np.maximum(slip, 1e-16), label=label)
        if has_force:
            ft = np.hypot(data[:, cols.index("f_tx")], data[:, cols.index("f_ty")])
            axes[1, 0].plot(t, ft, label=label)
    axes[0, 0].set_ylabel("|v_rel| [m/s]")
    axes[0, 0].legend()
    if has_force:
        axes[1, 0].set_ylabel("|f_t| [N]")
    axes[-1, 0].set_xlabel("t [s]")
    fig.tight_layout()
    if args.save:
        fig.savefig(args.save, dpi=150)
    else:
        plt.show()


if __name__ == "__main__":
    main()
