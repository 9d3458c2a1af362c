"""Three-panel space-time density heatmap of a simulation run.

Input: a run directory containing snapshot_<t>.csv files.  The incoming road
occupies the left panel, the two exits the right panels; the junction sits at
x = 0 and is marked on every panel.
"""

from __future__ import annotations

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .csvio import read_snapshots

_TITLES = ["road 0 (incoming)", "road 1 (exit)", "road 2 (exit)"]


def render(run_dir, out_path):
    ts, xs, rho = read_snapshots(run_dir)
    vmin = min(float(r.min()) for r in rho)
    vmax = max(float(r.max()) for r in rho)
    fig, axes = plt.subplots(1, 3, figsize=(12, 3.6), sharey=True)
    for j, ax in enumerate(axes):
        x = xs[j]
        if len(ts) == 1:
            # single snapshot: show it as a thin band so the colormap still applies
            extent = [x[0], x[-1], float(ts[0]), float(ts[0]) + 1e-3]
            img = rho[j]
        else:
            extent = [x[0], x[-1], float(ts[0]), float(ts[-1])]
            img = rho[j]
        im = ax.imshow(
            img, origin="lower", aspect="auto", extent=extent,
            vmin=vmin, vmax=vmax, cmap="viridis", interpolation="nearest",
        )
        ax.axvline(0.0, color="red", lw=0.8, ls="--")
        ax.set_title(_TITLES[j], fontsize=10)
        ax.set_xlabel("x")
    axes[0].set_ylabel("t")
    fig.colorbar(im, ax=axes, label="density", fraction=0.025)
    fig.savefig(out_path, dpi=130, metadata={"Software": None})
    plt.close(fig)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--in", dest="run_dir", required=True, help="simulation run directory")
    ap.add_argument("--out", required=True, help="output image path")
    args = ap.parse_args(argv)
    render(args.run_dir, args.out)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
