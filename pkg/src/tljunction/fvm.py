"""Conservative finite-volume solver for the signalized 1:2 junction.

Branch 0 occupies [-L, 0] and feeds the node at x = 0; branches 1 and 2
occupy [0, L].  Interior interfaces use the demand-supply (Godunov) flux; the
node flux comes from either the instantaneous light-phase rule (meso model,
with the signal clock compressed by eps) or from a Riemann rule built on the
homogenized germ parameters (macro model).  The 2:1 merge junction is solved
by reversing densities and space, running the 1:2 solver, and reversing back.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .flux import FluxFunction
from .germs import FluxTriple, GermParams, germ_contains
from .signals import Signal

CFL_DEFAULT = 0.9
_EQ_TOL = 1e-11


class GermTraceError(RuntimeError):
    """The macro junction rule produced a trace outside its germ."""


def godunov_flux(f: FluxFunction, uL, uR):
    """Demand-supply interface flux min(f+(uL), f-(uR))."""
    return np.minimum(f.envelope_plus(uL), f.envelope_minus(uR))


# -- junction rules --------------------------------------------------------


def meso_junction_flux(signal_clock, fluxes: FluxTriple, t: float, r0, r1, r2):
    """Light-phase node flux: the green exit takes min(A, demand, supply)."""
    a = signal_clock.A(t)
    k = signal_clock.phase(t)
    d0 = float(fluxes.f0.envelope_plus(r0))
    if k == 1:
        phi = min(a, d0, float(fluxes.f1.envelope_minus(r1)))
        return phi, phi, 0.0
    phi = min(a, d0, float(fluxes.f2.envelope_minus(r2)))
    return phi, 0.0, phi


def macro_junction_flux(
    params: GermParams,
    fluxes: FluxTriple,
    r0, r1, r2,
    audit: bool = True,
    tol: float = 1e-8,
):
    """Homogenized-node Riemann rule.

    With demand d = f0+(r0) and per-exit ceilings c_k = min(f_k-(r_k), bar_k),
    the total flux is the largest lam <= min(d, bar0) whose split respects
    both ceilings; a ceiling that binds takes its full value and the remaining
    demand goes to the other exit.  The reconstructed junction trace must pass
    germ membership (audit), otherwise the datum falsifies the rule.

    Returns (phi0, phi1, phi2).
    """
    d = float(fluxes.f0.envelope_plus(r0))
    ceil = [
        min(float(fluxes.f1.envelope_minus(r1)), params.bar1),
        min(float(fluxes.f2.envelope_minus(r2)), params.bar2),
    ]
    lam_tot = min(d, params.bar0)

    def ok(lam):
        return (
            float(params.hat1(lam)) <= ceil[0] + _EQ_TOL
            and float(params.hat2(lam)) <= ceil[1] + _EQ_TOL
        )

    if ok(lam_tot):
        phi = [float(params.hat1(lam_tot)), float(params.hat2(lam_tot))]
    else:
        lo, hi = 0.0, lam_tot
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if ok(mid):
                lo = mid
            else:
                hi = mid
        lam_star = lo
        hats = [float(params.hat1(lam_star)), float(params.hat2(lam_star))]
        binding = [k for k in (0, 1) if hats[k] >= ceil[k] - 1e-9]
        if not binding:
            phi = hats
        else:
            phi = [0.0, 0.0]
            spare = lam_tot - sum(ceil[k] for k in binding)
            for k in (0, 1):
                if k in binding:
                    phi[k] = ceil[k]
                else:
                    phi[k] = min(max(spare, 0.0), ceil[k])
    phi0 = phi[0] + phi[1]

    if audit:
        trace = _reconstruct_trace(params, fluxes, phi0, phi, d, ceil, (r0, r1, r2))
        if not germ_contains(params, fluxes, trace, tol):
            raise GermTraceError(
                f"junction trace {trace} for states {(r0, r1, r2)} "
                f"fluxes {(phi0, *phi)} is outside the germ"
            )
    return phi0, phi[0], phi[1]


def _reconstruct_trace(params, fluxes, phi0, phi, demand, ceil, states):
    """Junction-side densities consistent with the flux vector: a branch whose
    constraint binds sits on its congested side, otherwise it stays fluid."""
    if phi0 >= demand - 1e-10:
        t0 = float(fluxes.f0.inv_plus(phi0))
    else:
        t0 = float(fluxes.f0.inv_minus(phi0))
    out = [t0]
    for k in (0, 1):
        fk = fluxes[k + 1]
        supply = float(fk.envelope_minus(states[k + 1]))
        if phi[k] >= supply - 1e-10:
            out.append(float(fk.inv_minus(phi[k])))
        else:
            out.append(float(fk.inv_plus(phi[k])))
    return tuple(out)


# -- state and stepping ----------------------------------------------------


@dataclass
class BranchField:
    """Cell-averaged densities on the three branches."""

    fluxes: FluxTriple
    L: float
    dx: float
    rho0: np.ndarray  # [-L, 0], last cell touches the node
    rho1: np.ndarray  # [0, L], first cell touches the node
    rho2: np.ndarray
    t: float = 0.0

    @staticmethod
    def from_profiles(fluxes, L, dx, init0, init1, init2) -> "BranchField":
        n = int(round(L / dx))
        x_in = -L + (np.arange(n) + 0.5) * dx
        x_out = (np.arange(n) + 0.5) * dx
        return BranchField(
            fluxes, L, dx,
            np.asarray([init0(x) for x in x_in], dtype=float),
            np.asarray([init1(x) for x in x_out], dtype=float),
            np.asarray([init2(x) for x in x_out], dtype=float),
        )

    def centers(self, j: int) -> np.ndarray:
        n = len(self.rho0)
        if j == 0:
            return -self.L + (np.arange(n) + 0.5) * self.dx
        return (np.arange(n) + 0.5) * self.dx

    def rho(self, j: int) -> np.ndarray:
        return (self.rho0, self.rho1, self.rho2)[j]

    def mass(self) -> float:
        return float((self.rho0.sum() + self.rho1.sum() + self.rho2.sum()) * self.dx)

    def copy(self) -> "BranchField":
        return replace(
            self, rho0=self.rho0.copy(), rho1=self.rho1.copy(), rho2=self.rho2.copy()
        )

    def l1_distance(self, other: "BranchField") -> float:
        return float(
            (
                np.abs(self.rho0 - other.rho0).sum()
                + np.abs(self.rho1 - other.rho1).sum()
                + np.abs(self.rho2 - other.rho2).sum()
            )
            * self.dx
        )


def step(field: BranchField, node_flux, dt: float) -> dict:
    """One conservative update; node_flux = (phi0, phi1, phi2) at time field.t.

    Far boundaries are zero-gradient copies.  Returns a ledger entry with the
    boundary fluxes and the conservation residual of the step.
    """
    fx, dx = field.fluxes, field.dx
    phi0, phi1, phi2 = node_flux
    mass_before = field.mass()
    inflow = float(fx.f0(field.rho0[0]))
    out1 = float(fx.f1(field.rho1[-1]))
    out2 = float(fx.f2(field.rho2[-1]))

    interf0 = godunov_flux(fx.f0, field.rho0[:-1], field.rho0[1:])
    fl0 = np.concatenate([[inflow], interf0, [phi0]])
    field.rho0 -= dt / dx * np.diff(fl0)

    for rho, f, phi, out in (
        (field.rho1, fx.f1, phi1, out1),
        (field.rho2, fx.f2, phi2, out2),
    ):
        interf = godunov_flux(f, rho[:-1], rho[1:])
        fl = np.concatenate([[phi], interf, [out]])
        rho -= dt / dx * np.diff(fl)

    field.t += dt
    residual = field.mass() - mass_before - dt * (inflow - out1 - out2)
    return {
        "t": field.t,
        "dt": dt,
        "inflow": inflow,
        "out1": out1,
        "out2": out2,
        "phi0": phi0,
        "phi1": phi1,
        "phi2": phi2,
        "residual": residual,
    }


# -- scenarios and orchestration -------------------------------------------


@dataclass
class Scenario:
    """Full description of one junction run."""

    fluxes: FluxTriple
    signal: Signal
    model: str  # "meso" | "macro"
    eps: float
    T: float
    L: float
    dx: float
    init: tuple[Callable, Callable, Callable]
    merge: bool = False  # True: 2:1 orientation, solved through simulate_2to1
    cfl: float = CFL_DEFAULT
    snapshot_times: tuple[float, ...] = ()
    germ: GermParams | None = None  # macro model; built on demand otherwise
    name: str = "scenario"

    def wave_margin_ok(self) -> bool:
        return self.T * self.fluxes.max_speed() <= self.L


@dataclass
class Trajectory:
    scenario: Scenario
    final: BranchField
    snapshots: dict
    trace: list  # rows (t, phi0, phi1, phi2, p0, p1, p2)
    max_residual: float
    warnings: list = field(default_factory=list)
    ledger: list = field(default_factory=list)  # rows (t, dt, mass, residual)

    def boundary_trace(self, branch: int) -> np.ndarray:
        """Time series of the node-adjacent cell average on one branch."""
        col = 4 + branch
        return np.array([(row[0], row[col]) for row in self.trace])


def _macro_params(scenario: Scenario) -> GermParams:
    if scenario.germ is not None:
        return scenario.germ
    from .effective import build_effective_germ

    return build_effective_germ(scenario.signal, scenario.fluxes).params


def simulate(scenario: Scenario, record_trace: bool = True) -> Trajectory:
    """Advance the scenario to time T.

    Meso steps are clipped at the eps-scaled switch instants so each step sees
    one constant light phase; macro steps are clipped only at snapshot times.
    """
    sc = scenario
    if sc.merge:
        raise ValueError("merge scenarios go through simulate_2to1")
    field_ = BranchField.from_profiles(sc.fluxes, sc.L, sc.dx, *sc.init)
    warnings = []
    if not sc.wave_margin_ok():
        warnings.append(
            "waves can reach the far boundaries before T; copy boundaries "
            "will absorb them (fine for outflow, approximate otherwise)"
        )
    speed = sc.fluxes.max_speed()
    dt_max = sc.cfl * sc.dx / speed
    if sc.model == "meso":
        clock = sc.signal.compressed(sc.eps)
        switch_times = clock.breakpoints_in(0.0, sc.T + 1e-12)
        rule = lambda t, f: meso_junction_flux(clock, sc.fluxes, t, f.rho0[-1], f.rho1[0], f.rho2[0])
    elif sc.model == "macro":
        params = _macro_params(sc)
        switch_times = np.array([])
        rule = lambda t, f: macro_junction_flux(params, sc.fluxes, f.rho0[-1], f.rho1[0], f.rho2[0])
    else:
        raise ValueError(f"simulate handles meso|macro, got {sc.model!r}")

    stops = np.unique(np.concatenate([
        switch_times, np.asarray(sc.snapshot_times, dtype=float), [sc.T]
    ]))
    stops = stops[(stops > 1e-14) & (stops <= sc.T + 1e-12)]

    snapshots = {}
    trace_rows = []
    ledger_rows = []
    max_res = 0.0
    for t_stop in stops:
        while field_.t < t_stop - 1e-13:
            dt = min(dt_max, t_stop - field_.t)
            nf = rule(field_.t, field_)
            entry = step(field_, nf, dt)
            max_res = max(max_res, abs(entry["residual"]))
            if record_trace:
                trace_rows.append((
                    entry["t"], entry["phi0"], entry["phi1"], entry["phi2"],
                    float(field_.rho0[-1]), float(field_.rho1[0]), float(field_.rho2[0]),
                ))
                ledger_rows.append((
                    entry["t"], entry["dt"], field_.mass(), entry["residual"],
                ))
        for ts in sc.snapshot_times:
            if abs(field_.t - ts) < 1e-12 and ts not in snapshots:
                snapshots[ts] = field_.copy()
    if sc.T not in snapshots:
        snapshots[sc.T] = field_.copy()
    return Trajectory(sc, field_, snapshots, trace_rows, max_res, warnings, ledger_rows)


def homogenization_error(scenario: Scenario, eps_list) -> list[tuple[float, float]]:
    """L1 distance at time T between each compressed-signal run and the
    homogenized-germ run on the same grid."""
    macro = replace(scenario, model="macro")
    ref = simulate(macro, record_trace=False).final
    out = []
    for eps in eps_list:
        traj = simulate(replace(scenario, model="meso", eps=eps), record_trace=False)
        out.append((eps, traj.final.l1_distance(ref)))
    return out


def kato_check(scenario: Scenario, init_a, init_b, n_report: int = 200):
    """L1 distance series between two runs of the same scenario in lockstep.

    Both runs share the exact step sequence, so the series is the discrete
    contraction diagnostic: it must never increase (up to roundoff).
    """
    sc = scenario
    fa = BranchField.from_profiles(sc.fluxes, sc.L, sc.dx, *init_a)
    fb = BranchField.from_profiles(sc.fluxes, sc.L, sc.dx, *init_b)
    speed = sc.fluxes.max_speed()
    dt_max = sc.cfl * sc.dx / speed
    if sc.model == "meso":
        clock = sc.signal.compressed(sc.eps)
        switch_times = clock.breakpoints_in(0.0, sc.T + 1e-12)
        rule = lambda t, f: meso_junction_flux(clock, sc.fluxes, t, f.rho0[-1], f.rho1[0], f.rho2[0])
    else:
        params = _macro_params(sc)
        switch_times = np.array([])
        rule = lambda t, f: macro_junction_flux(params, sc.fluxes, f.rho0[-1], f.rho1[0], f.rho2[0])
    stops = np.unique(np.concatenate([switch_times, [sc.T]]))
    stops = stops[(stops > 1e-14) & (stops <= sc.T + 1e-12)]
    series = [(0.0, fa.l1_distance(fb))]
    for t_stop in stops:
        while fa.t < t_stop - 1e-13:
            dt = min(dt_max, t_stop - fa.t)
            step(fa, rule(fa.t, fa), dt)
            step(fb, rule(fb.t, fb), dt)
            series.append((fa.t, fa.l1_distance(fb)))
    stride = max(1, len(series) // n_report)
    return series[::stride] + [series[-1]]


def bv_estimate(field_: BranchField, branch: int, x0: float, R: float) -> float:
    """Total variation of the branch profile over the window |x - x0| <= R/3.

    The full box |x - x0| <= R must stay inside the branch and away from the
    node.
    """
    xs = field_.centers(branch)
    lo_dom, hi_dom = (xs[0] - field_.dx / 2, xs[-1] + field_.dx / 2)
    if x0 - R < lo_dom or x0 + R > hi_dom:
        raise ValueError("window of radius R leaves the branch")
    if branch == 0 and x0 + R > -field_.dx / 2:
        raise ValueError("window touches the node")
    if branch != 0 and x0 - R < field_.dx / 2:
        raise ValueError("window touches the node")
    sel = np.abs(xs - x0) <= R / 3
    vals = field_.rho(branch)[sel]
    return float(np.abs(np.diff(vals)).sum())


# -- 2:1 merge junction via reversion --------------------------------------


def _reverse_init(init):
    return lambda x: -init(-x)


def reversed_scenario(scenario: Scenario) -> Scenario:
    """Map a 2:1 merge scenario to the equivalent 1:2 diverge scenario."""
    if not scenario.merge:
        raise ValueError("scenario is already in diverge orientation")
    return replace(
        scenario,
        fluxes=scenario.fluxes.reverse(),
        merge=False,
        init=tuple(_reverse_init(i) for i in scenario.init),
        name=scenario.name + "-reversed",
    )


def reverse_field(field_: BranchField, fluxes: FluxTriple) -> BranchField:
    """Density/space reversal of a solved field back to merge orientation."""
    return BranchField(
        fluxes, field_.L, field_.dx,
        -field_.rho0[::-1].copy(), -field_.rho1[::-1].copy(), -field_.rho2[::-1].copy(),
        field_.t,
    )


def simulate_2to1(scenario: Scenario) -> Trajectory:
    """Solve a merge (2:1) scenario by reversion.

    scenario.fluxes and scenario.init are given in merge orientation: road 0
    is outgoing on x >= 0, roads 1 and 2 feed the node from x <= 0.  The
    trajectory is returned in merge orientation.
    """
    fwd = reversed_scenario(scenario)
    traj = simulate(fwd, record_trace=False)
    final = reverse_field(traj.final, scenario.fluxes)
    snaps = {t: reverse_field(f, scenario.fluxes) for t, f in traj.snapshots.items()}
    return Trajectory(scenario, final, snaps, [], traj.max_residual, traj.warnings)
