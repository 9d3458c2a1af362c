"""Regenerate every bundled figure in plots/figures from the CSVs in
plots/examples.  No physics is recomputed here: the CSVs are the only input,
so the figures are byte-reproducible."""

from pathlib import Path

from junction_plots import convergence, decay, heatmap, splits

ROOT = Path(__file__).resolve().parent.parent
EX = ROOT / "examples"
FIG = ROOT / "figures"

JOBS = [
    (splits.main, ["--in", str(EX / "effective_alternating.csv"),
                   "--out", str(FIG / "splits_alternating.png"),
                   "--oracle", "alternating:0.5"]),
    (splits.main, ["--in", str(EX / "effective_stop.csv"),
                   "--out", str(FIG / "splits_stop.png"),
                   "--oracle", "stop:0.2,0.4"]),
    (heatmap.main, ["--in", str(EX / "run_stop"),
                    "--out", str(FIG / "heatmap_stop.png")]),
    (convergence.main, ["--in", str(EX / "convergence.csv"),
                        "--out", str(FIG / "convergence.png")]),
    (decay.main, ["--in", str(EX / "corrector.csv"),
                  "--out", str(FIG / "decay.png")]),
]


def main() -> int:
    FIG.mkdir(exist_ok=True)
    for fn, argv in JOBS:
        rc = fn(argv)
        if rc != 0:
            return rc
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
