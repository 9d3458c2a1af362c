#!/usr/bin/env python3
"""Print the homogenized limiters and split curves of a scenario's signal,
with the closed-form overlay when the signal is one of the two bundled
reference timings."""

import argparse
from pathlib import Path

import numpy as np

from tljunction.effective import build_effective_germ
from tljunction.scenario_io import load_scenario

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--scenario", default=str(SCENARIOS / "stop.ini"))
    ap.add_argument("--n", type=int, default=11)
    args = ap.parse_args()

    sc = load_scenario(args.scenario)
    eff = build_effective_germ(sc.signal, sc.fluxes)
    p = eff.params
    print(f"bar0={p.bar0:.6f}  bar1={p.bar1:.6f}  bar2={p.bar2:.6f}")
    print(f"{'lambda':>10} {'hat1':>10} {'hat2':>10}")
    for lam in np.linspace(0.0, p.bar0, args.n):
        print(f"{lam:10.4f} {float(p.hat1(lam)):10.6f} {float(p.hat2(lam)):10.6f}")


if __name__ == "__main__":
    main()
