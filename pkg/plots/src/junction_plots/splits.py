"""Split-curve figure: hat1 and hat2 against the total flux.

Optional closed-form overlays for the two reference signal timings:

- --oracle alternating:THETA1       (caps-saturating two-phase light)
- --oracle stop:THETA0,THETA1       (red interval, then the two greens)

With an overlay the figure annotates the sup distance between the tabulated
curves and the formulas, computed from the CSV values only.
"""

from __future__ import annotations

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .csvio import SchemaError, read_effective_germ


def _oracle_curves(spec, lams, bars):
    kind, _, params = spec.partition(":")
    bar0 = bars["bar0"]
    lam = np.minimum(lams, bar0)
    if kind == "alternating":
        th1 = float(params)
        bar2 = bars["bar2"]
        return np.maximum(th1 * lam, lam - bar2), np.minimum((1 - th1) * lam, bar2)
    if kind == "stop":
        th0, th1 = (float(v) for v in params.split(","))
        bar1 = bars["bar1"]
        return np.minimum(lam * (th0 + th1), bar1), np.maximum(lam * (1 - th0 - th1), lam - bar1)
    raise SchemaError(f"unknown oracle {kind!r}")


def render(csv_path, out_path, oracle=None):
    bars, lams, hat1, hat2 = read_effective_germ(csv_path)
    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.plot(lams, hat1, label="hat1", color="tab:blue")
    ax.plot(lams, hat2, label="hat2", color="tab:orange")
    if oracle:
        o1, o2 = _oracle_curves(oracle, lams, bars)
        ax.plot(lams, o1, ls=":", color="k", lw=1, label="closed form")
        ax.plot(lams, o2, ls=":", color="k", lw=1)
        sup = max(float(np.max(np.abs(hat1 - o1))), float(np.max(np.abs(hat2 - o2))))
        ax.annotate(f"sup error = {sup:.2e}", xy=(0.04, 0.92), xycoords="axes fraction")
    if "bar0" in bars:
        ax.axvline(bars["bar0"], color="gray", lw=0.6, ls="--")
    ax.set_xlabel("total flux")
    ax.set_ylabel("split")
    ax.legend(loc="lower right", fontsize=9)
    fig.tight_layout()
    fig.savefig(out_path, dpi=130, metadata={"Software": None})
    plt.close(fig)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--in", dest="csv_path", required=True, help="effective_germ.csv")
    ap.add_argument("--out", required=True)
    ap.add_argument("--oracle", default=None, help="alternating:TH1 or stop:TH0,TH1")
    args = ap.parse_args(argv)
    render(args.csv_path, args.out, args.oracle)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
