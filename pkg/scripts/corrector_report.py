#!/usr/bin/env python3
"""Survey the exact periodic junction profiles: one per stratum of the
homogenized germ, with trace membership rates and decay constants."""

import argparse
from pathlib import Path

import numpy as np

from tljunction.correctors import corrector, decay_sup, queue_extent
from tljunction.effective import build_effective_germ, characteristic_subgerm
from tljunction.germs import meso_contains_direct
from tljunction.scenario_io import load_scenario

SCENARIO = Path(__file__).resolve().parent.parent / "scenarios" / "stop.ini"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--scenario", default=str(SCENARIO))
    ap.add_argument("--n-times", type=int, default=400)
    args = ap.parse_args()

    sc = load_scenario(args.scenario)
    eff = build_effective_germ(sc.signal, sc.fluxes)
    pts = characteristic_subgerm(eff, sc.fluxes, 3)
    ts = (np.arange(args.n_times) + 0.5) / args.n_times
    for case, p in pts:
        fld = corrector(p, eff, sc.fluxes)
        sig = sc.signal if case in ("i", "iv") else sc.signal.masked(1 if case == "ii" else 2)
        rate = np.mean([
            meso_contains_direct(sig, sc.fluxes, t, fld.trace_triple(t), 1e-3) for t in ts
        ])
        c10 = 10 * decay_sup(fld, 10, n_t=8, n_x=4)
        line = (
            f"case {case:<3} far=({fld.far[0]:.4f}, {fld.far[1]:.4f}, {fld.far[2]:.4f})"
            f"  trace pass {rate:6.1%}  C(10)={c10:.4f}"
        )
        if case == "i":
            line += f"  queue extent {queue_extent(fld, x_max=4.0, n=100):.3f}"
        print(line)


if __name__ == "__main__":
    main()
