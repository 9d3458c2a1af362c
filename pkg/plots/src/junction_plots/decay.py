"""Far-field decay figure from corrector.csv: per branch, the deviation of
the profile from its outermost sampled value against distance from the node,
on log-log axes.  The far value is taken from the CSV itself (largest |x|),
so nothing is recomputed."""

from __future__ import annotations

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .csvio import read_corrector

_LABELS = {0: "road 0", 1: "road 1", 2: "road 2"}


def render(csv_path, out_path):
    branches = read_corrector(csv_path)
    fig, ax = plt.subplots(figsize=(5.5, 4))
    for j, (ts, xs, u) in sorted(branches.items()):
        dist = np.abs(xs)
        order = np.argsort(dist)
        far = u[:, order[-1]].mean()
        dev = np.max(np.abs(u - far), axis=0)
        ax.loglog(dist[order], np.maximum(dev[order], 1e-16), ".-", lw=0.8,
                  label=_LABELS.get(j, str(j)))
    ax.set_xlabel("|x|")
    ax.set_ylabel("sup_t |u - far|")
    ax.legend(fontsize=9)
    ax.grid(True, which="both", lw=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=130, metadata={"Software": None})
    plt.close(fig)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--in", dest="csv_path", required=True, help="corrector.csv")
    ap.add_argument("--out", required=True)
    args = ap.parse_args(argv)
    render(args.csv_path, args.out)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
