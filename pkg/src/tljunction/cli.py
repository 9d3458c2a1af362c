"""Command-line harness.

Subcommands:

- effective:   tabulate the homogenized split curves -> effective_germ.csv
- germ-check:  membership/dissipation audit of the germ -> germ_check.csv
- corrector:   sample an exact periodic profile -> corrector.csv + report.txt
- simulate:    advance a scenario -> snapshot_<t>.csv, trace.csv, ledger.csv
- homogenize:  eps sweep against the macro reference -> convergence.csv
- battery:     run the regression battery, table to stdout

Every run gets its own output directory under --out (or $TLJUNCTION_OUT,
default ./runs) with a manifest.json recording the resolved inputs; re-running
the same manifest reproduces byte-identical CSVs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from importlib import metadata
from pathlib import Path

import numpy as np

from .battery import run_battery
from .correctors import corrector, decay_sup, queue_extent
from .effective import build_effective_germ
from .fvm import simulate, simulate_2to1
from .germs import (
    check_germ_property,
    gamma_point,
    generator_set,
    germ_violation,
    meso_contains_direct,
    sample_germ,
    special_points,
)
from .scenario_io import load_scenario

_FMT = "{:.17g}".format  # shortest round-trip float text, deterministic


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def _out_dir(args, subcommand: str) -> Path:
    root = Path(args.out or os.environ.get("TLJUNCTION_OUT", "runs"))
    base = root / f"{Path(args.scenario).stem}-{subcommand}"
    path, n = base, 1
    while path.exists():
        n += 1
        path = base.with_name(f"{base.name}-{n}")
    path.mkdir(parents=True)
    return path


def _write_csv(path: Path, header: str, rows, comments: list[str] = ()) -> None:
    with open(path, "w") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(_FMT(v) if isinstance(v, float) else str(v) for v in row) + "\n")


def _write_manifest(out: Path, args, extra: dict = ()) -> None:
    manifest = {
        "subcommand": args.command,
        "scenario": str(Path(args.scenario).resolve()) if getattr(args, "scenario", None) else None,
        "version": _version(),
        "argv": sys.argv[1:],
        **dict(extra),
    }
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


# -- subcommands -----------------------------------------------------------


def cmd_effective(args) -> int:
    sc = load_scenario(args.scenario)
    eff = build_effective_germ(sc.signal, sc.fluxes, n_fill=args.n_fill)
    p = eff.params
    out = _out_dir(args, "effective")
    grid = p.hat1.xs
    rows = zip(map(float, grid), map(float, p.hat1(grid)), map(float, p.hat2(grid)))
    _write_csv(
        out / "effective_germ.csv",
        "lambda,hat1,hat2",
        rows,
        comments=[f"bar0={_FMT(p.bar0)},bar1={_FMT(p.bar1)},bar2={_FMT(p.bar2)}"],
    )
    _write_manifest(out, args, {"n_fill": args.n_fill})
    print(f"wrote {out / 'effective_germ.csv'} ({len(grid)} rows)")
    return 0


def cmd_germ_check(args) -> int:
    sc = load_scenario(args.scenario)
    eff = build_effective_germ(sc.signal, sc.fluxes)
    rng = np.random.default_rng(args.seed)
    points = [("generator", p) for p in generator_set(eff.params, sc.fluxes, 33)]
    points += [("sample", p) for p in sample_germ(eff.params, sc.fluxes, args.samples, rng)]
    bad = []
    for kind, p in points:
        v = germ_violation(eff.params, sc.fluxes, p)
        if v > args.tol:
            bad.append((kind, float(p[0]), float(p[1]), float(p[2]), float(v)))
    worst_d = check_germ_property(eff.params, sc.fluxes, args.samples, rng)
    if worst_d < -1e-9:
        g = gamma_point(eff.params, sc.fluxes, 0.0)
        bad.append(("dissipation", *map(float, g), float(-worst_d)))
    out = _out_dir(args, "germ-check")
    _write_csv(out / "germ_check.csv", "kind,p0,p1,p2,violation", bad)
    _write_manifest(out, args, {"seed": args.seed, "tol": args.tol, "samples": args.samples})
    print(
        f"checked {len(points)} points, min pair dissipation {worst_d:.2e}, "
        f"{len(bad)} violations -> {out / 'germ_check.csv'}"
    )
    return 1 if bad else 0


def cmd_corrector(args) -> int:
    sc = load_scenario(args.scenario)
    eff = build_effective_germ(sc.signal, sc.fluxes)
    if args.case == "i":
        lam = eff.bar0 * args.lam_frac
        p = gamma_point(eff.params, sc.fluxes, lam)
    else:
        idx = {"ii": 0, "iii": 1, "iv": 2}[args.case]
        p = special_points(eff.params, sc.fluxes)[idx]
    fld = corrector(p, eff, sc.fluxes)

    ts = np.linspace(0.0, 1.0, args.nt, endpoint=False)
    xs = np.linspace(args.x_max / args.nx, args.x_max, args.nx)
    rows = []
    for t in ts:
        for x in xs:
            rows.append((float(t), float(-x), 0, float(fld.u0(t, -x))))
        for j in (1, 2):
            for x in xs:
                rows.append((float(t), float(x), j, float(fld.branch(j)(t, x))))
    out = _out_dir(args, "corrector")
    _write_csv(out / "corrector.csv", "t,x,branch,u", rows)

    sig_for_trace = (
        sc.signal if fld.case in ("i", "iv")
        else sc.signal.masked(1 if fld.case == "ii" else 2)
    )
    n_check = 1000
    tcheck = (np.arange(n_check) + 0.5) / n_check
    passed = sum(
        meso_contains_direct(sig_for_trace, sc.fluxes, t, fld.trace_triple(t), 1e-3)
        for t in tcheck
    )
    cs = {M: decay_sup(fld, M, n_t=10, n_x=6) * M for M in (10, 20, 40)}
    lines = [
        f"case {fld.case}, far fields {tuple(round(v, 12) for v in fld.far)}",
        f"trace membership pass rate: {passed}/{n_check} (tol 1e-3)",
        "decay constants C(M) = M * sup_{|x| in [M,2M]} |u - far|:",
    ]
    lines += [f"  M={M}: C={c:.6f}" for M, c in cs.items()]
    if fld.case == "i":
        lines.append(f"incoming queue extent: {queue_extent(fld, x_max=args.x_max):.4f}")
    (out / "report.txt").write_text("\n".join(lines) + "\n")
    _write_manifest(out, args, {"case": args.case, "lam_frac": args.lam_frac})
    print("\n".join(lines))
    print(f"wrote {out / 'corrector.csv'} and report.txt")
    return 0


def _snapshot_rows(field, merge=False):
    for j in range(3):
        xs = field.centers(j)
        if merge:
            # merge orientation mirrors the axis; cell values are already
            # stored in ascending mirrored order
            xs = -xs[::-1]
        vals = field.rho(j)
        for x, v in zip(xs, vals):
            yield float(x), j, float(v)


def cmd_simulate(args) -> int:
    sc = load_scenario(args.scenario)
    if args.model:
        sc = replace(sc, model=args.model if args.model != "two-to-one" else sc.model,
                     merge=args.model == "two-to-one" or sc.merge)
    if args.eps is not None:
        sc = replace(sc, eps=args.eps)
    traj = simulate_2to1(sc) if sc.merge else simulate(sc)
    out = _out_dir(args, "simulate")
    for t, field in sorted(traj.snapshots.items()):
        _write_csv(out / f"snapshot_{t:g}.csv", "x,branch,rho", _snapshot_rows(field, sc.merge))
    _write_csv(out / "trace.csv", "t,phi0,phi1,phi2,p0,p1,p2", traj.trace)
    _write_csv(out / "ledger.csv", "t,dt,mass,residual", traj.ledger)
    _write_manifest(out, args, {
        "model": "two-to-one" if sc.merge else sc.model,
        "eps": sc.eps,
        "max_residual": traj.max_residual,
        "warnings": traj.warnings,
    })
    print(f"{len(traj.snapshots)} snapshots, max conservation residual "
          f"{traj.max_residual:.2e} -> {out}")
    for w in traj.warnings:
        print(f"warning: {w}")
    return 0


def cmd_homogenize(args) -> int:
    sc = load_scenario(args.scenario)
    eps_list = [float(v) for v in args.eps_list.split(",")]
    macro = replace(sc, model="macro")
    ref = simulate(macro, record_trace=False).final

    def one(eps):
        traj = simulate(replace(sc, model="meso", eps=eps), record_trace=False)
        return eps, traj.final.l1_distance(ref)

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            pairs = list(pool.map(one, eps_list))
    else:
        pairs = [one(e) for e in eps_list]
    out = _out_dir(args, "homogenize")
    _write_csv(out / "convergence.csv", "eps,l1_error", pairs)
    _write_manifest(out, args, {"eps_list": eps_list, "jobs": args.jobs})
    for eps, err in pairs:
        print(f"eps={eps:g}: L1 error {err:.6f}")
    print(f"wrote {out / 'convergence.csv'}")
    return 0


def cmd_battery(args) -> int:
    results = run_battery(args.filter)
    if not results:
        print(f"no battery check matches filter {args.filter!r}")
        return 2
    width = max(len(r["name"]) for r in results)
    failures = 0
    for r in results:
        status = "PASS" if r["passed"] else "FAIL"
        failures += not r["passed"]
        print(f"{r['name']:<{width}}  {status}  {r['seconds']:7.1f}s  {r['detail']}")
    print(f"{len(results) - failures}/{len(results)} checks passed")
    return 1 if failures else 0


# -- argument parsing ------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tljunction", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, scenario=True):
        p = sub.add_parser(name)
        p.set_defaults(fn=fn)
        if scenario:
            p.add_argument("--scenario", required=True, help="scenario config file")
            p.add_argument("--out", default=None, help="output root (default $TLJUNCTION_OUT or ./runs)")
        return p

    p = add("effective", cmd_effective)
    p.add_argument("--n-fill", type=int, default=256, help="uniform grid points added to the kink grid")

    p = add("germ-check", cmd_germ_check)
    p.add_argument("--samples", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-8)

    p = add("corrector", cmd_corrector)
    p.add_argument("--case", choices=["i", "ii", "iii", "iv"], default="i")
    p.add_argument("--lam-frac", type=float, default=0.5,
                   help="case i: total flux as a fraction of bar0")
    p.add_argument("--nt", type=int, default=64)
    p.add_argument("--nx", type=int, default=128)
    p.add_argument("--x-max", type=float, default=4.0)

    p = add("simulate", cmd_simulate)
    p.add_argument("--model", choices=["meso", "macro", "two-to-one"], default=None)
    p.add_argument("--eps", type=float, default=None)

    p = add("homogenize", cmd_homogenize)
    p.add_argument("--eps-list", default="0.25,0.125,0.0625,0.03125")
    p.add_argument("--jobs", type=int, default=1)

    p = add("battery", cmd_battery, scenario=False)
    p.add_argument("--filter", default="", help="run only checks whose name contains this string")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
