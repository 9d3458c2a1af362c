#!/usr/bin/env python3
"""Eps-sweep of the alternating-signal Riemann problem against the
homogenized junction model.  Writes convergence.csv next to the snapshots."""

import argparse
from pathlib import Path

from tljunction.fvm import homogenization_error
from tljunction.scenario_io import load_scenario

SCENARIO = Path(__file__).resolve().parent.parent / "scenarios" / "alternating.ini"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--scenario", default=str(SCENARIO))
    ap.add_argument("--eps-list", default="0.25,0.125,0.0625,0.03125")
    ap.add_argument("--out", default="convergence.csv")
    args = ap.parse_args()

    sc = load_scenario(args.scenario)
    eps_list = [float(v) for v in args.eps_list.split(",")]
    pairs = homogenization_error(sc, eps_list)
    with open(args.out, "w") as fh:
        fh.write("eps,l1_error\n")
        for eps, err in pairs:
            fh.write(f"{eps:.17g},{err:.17g}\n")
            print(f"eps={eps:<8g} L1 error {err:.6f}")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
