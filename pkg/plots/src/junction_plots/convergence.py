"""Log-log eps-convergence figure from convergence.csv, with the fitted
slope annotated.  A non-monotone error series gets a warning annotation but
still renders."""

from __future__ import annotations

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .csvio import read_convergence


def render(csv_path, out_path):
    eps, err = read_convergence(csv_path)
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog(eps, err, "o-", color="tab:blue")
    slope = np.polyfit(np.log(eps), np.log(np.maximum(err, 1e-300)), 1)[0]
    ax.annotate(f"fitted slope = {slope:.2f}", xy=(0.05, 0.9), xycoords="axes fraction")
    if np.any(np.diff(err) > 0):  # eps sorted decreasing: err should decrease too
        ax.annotate("warning: non-monotone series", xy=(0.05, 0.82),
                    xycoords="axes fraction", color="tab:red")
    ax.set_xlabel("eps")
    ax.set_ylabel("L1 error")
    ax.grid(True, which="both", lw=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=130, metadata={"Software": None})
    plt.close(fig)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--in", dest="csv_path", required=True, help="convergence.csv")
    ap.add_argument("--out", required=True)
    args = ap.parse_args(argv)
    render(args.csv_path, args.out)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
