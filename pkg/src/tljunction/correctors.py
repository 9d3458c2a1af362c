"""Time-periodic exact profiles of the signalized junction model.

The building block is the variational solution on a half line

    w(t, x) = sup_{t1 <= t} psi(t1) - xi(t - t1, x),

with xi the Hopf-Lax kernel of an increasing flux branch and psi a 1-periodic
piecewise-linear boundary value.  Its space gradient, evaluated through the
envelope theorem at the optimizer, yields density profiles that solve the
conservation law exactly on each branch and realize a prescribed junction
trace.  A corrector bundles the three branch profiles for one far-field
triple of the homogenized germ.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .effective import EffectiveGerm, FluxProfile, flux_profile
from .flux import FluxFunction, RestrictedFlux
from .germs import FluxTriple
from .signals import Signal

_FLAT_TOL = 1e-13


@dataclass(frozen=True)
class PeriodicBoundary:
    """1-periodic piecewise-linear boundary value with explicit breakpoints."""

    ts: np.ndarray  # breakpoints in [0, 1], ts[0] = 0, ts[-1] = 1
    vs: np.ndarray

    def __post_init__(self):
        ts = np.asarray(self.ts, dtype=float)
        vs = np.asarray(self.vs, dtype=float)
        if abs(ts[0]) > 1e-12 or abs(ts[-1] - 1.0) > 1e-12:
            raise ValueError("breakpoints must span [0, 1]")
        if abs(vs[0] - vs[-1]) > 1e-9:
            raise ValueError("boundary value must be 1-periodic")
        object.__setattr__(self, "ts", ts)
        object.__setattr__(self, "vs", vs)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        tau = t - np.floor(t)
        out = np.interp(tau, self.ts, self.vs)
        return float(out) if out.ndim == 0 else out

    @property
    def span(self) -> float:
        return float(np.max(self.vs) - np.min(self.vs))

    def slopes(self) -> np.ndarray:
        return np.diff(self.vs) / np.diff(self.ts)


@dataclass(frozen=True)
class HalfLineSolution:
    """w(t, x) = sup_{t1 <= t} psi(t1) - xi(t - t1, x) on x >= 0 and its
    gradient.

    The sup is exact: candidates are the breakpoints of psi within a finite
    horizon (beyond which xi dominates the oscillation of psi) plus one
    interior stationary point per distinct slope of psi, solved in closed
    form from the envelope identity psi'(t1) = -d/ds xi.
    """

    g: RestrictedFlux
    psi: PeriodicBoundary

    def _flat(self) -> bool:
        return self.psi.span < _FLAT_TOL

    def _rest_density(self) -> float:
        # zero of g: the gradient of the trivial solution psi + p x
        return float(self.g.inverse(0.0))

    def _horizon(self, x: float) -> float:
        g_top = float(self.g(self.g.hi))
        if g_top <= 1e-12:
            raise ValueError("flux branch has no positive range; boundary must be flat")
        width = self.g.hi - self.g.lo
        return (self.psi.span + width * x) / g_top + 2.0

    def _candidates(self, t: float, x: float) -> np.ndarray:
        t_min = t - self._horizon(x)
        base = self.psi.ts[:-1]
        lo, hi = int(np.floor(t_min)), int(np.floor(t)) + 1
        bps = np.concatenate([base + k for k in range(lo, hi + 1)])
        bps = bps[(bps >= t_min) & (bps <= t)]
        cands = [bps, np.array([t_min, t])]
        # interior stationary points, one per distinct boundary slope
        glo, ghi = self.g.value_range()
        if x > 0:
            for m in np.unique(np.round(self.psi.slopes(), 12)):
                v = -m
                if not glo < v < ghi:
                    continue
                p_star = float(self.g.inverse(v))
                gp = float(self.g.deriv(p_star))
                if gp <= 1e-14:
                    continue
                t1 = t - x / gp
                if t_min < t1 < t:
                    cands.append(np.array([t1]))
        return np.concatenate(cands)

    def _objective(self, t: float, x: float, t1: np.ndarray):
        s = t - t1
        with np.errstate(divide="ignore"):
            ratio = np.where(s > 0, x / np.maximum(s, 1e-300), np.inf)
        p_hat = self.g.deriv_inv(ratio)
        p_hat = np.where((s == 0) & (x == 0), self.g.hi, p_hat)
        xi = -p_hat * x + s * self.g(p_hat)
        return self.psi(t1) - xi, p_hat

    def value(self, t: float, x: float) -> float:
        if self._flat():
            return float(self.psi.vs[0]) + self._rest_density() * x
        t1 = self._candidates(t, x)
        vals, _ = self._objective(t, x, t1)
        return float(np.max(vals))

    def gradient(self, t: float, x: float, tie_tol: float = 1e-9):
        """Space gradient at (t, x): p_hat at the optimizer.

        Returns (p_best, p_lo, p_hi); p_lo < p_hi flags a kink where two
        optimizers coexist.
        """
        if self._flat():
            p = self._rest_density()
            return p, p, p
        t1 = self._candidates(t, x)
        vals, p_hat = self._objective(t, x, t1)
        top = np.max(vals)
        near = p_hat[vals >= top - tie_tol * (1.0 + abs(top))]
        i = int(np.argmax(vals))
        return float(p_hat[i]), float(np.min(near)), float(np.max(near))


# -- branch profiles -------------------------------------------------------


def incoming_solution(p0: float, signal: Signal, f0: FluxFunction):
    """Profile machinery for the incoming road with far-field density p0.

    p0 on the rising branch gives the fluid regime (clipped at zero, compact
    queue support); p0 past the crest gives the congested regime (unclipped).
    Returns (HalfLineSolution in mirrored coordinates, FluxProfile, congested).
    """
    lam = float(f0(p0))
    congested = p0 > f0.b + 1e-12
    if not congested and lam > signal.mean() + 1e-12:
        raise ValueError("fluid far-field flux must not exceed the mean limiter")
    prof = flux_profile(lam, signal, congested=congested)
    pb = PeriodicBoundary(prof.ts, prof.psis)
    g_hat = RestrictedFlux(
        f0, lo=p0 - f0.c, hi=p0 - f0.b, shift=p0, offset=lam, orient=-1
    )
    return HalfLineSolution(g=g_hat, psi=pb), prof, congested


def w0(p0: float, signal: Signal, f0: FluxFunction, t: float, x: float) -> float:
    """Incoming-road potential at (t, x), x <= 0."""
    if x > 1e-12:
        raise ValueError("incoming road lives on x <= 0")
    sol, _, congested = incoming_solution(p0, signal, f0)
    v = sol.value(t, -x)
    return v if congested else max(v, 0.0)


def incoming_density(sol: HalfLineSolution, p0: float, congested: bool, t: float, x: float) -> float:
    """u0(t, x) = p0 + d/dx w0 evaluated through the optimizer."""
    if congested:
        p, _, _ = sol.gradient(t, -x)
        return p0 - p
    v = sol.value(t, -x)
    if v <= _FLAT_TOL:
        return p0
    p, _, _ = sol.gradient(t, -x)
    return p0 - p


def trace_flux_w0(p0: float, signal: Signal, f0: FluxFunction, t: float):
    """Demand envelope of the incoming trace and the junction flux at time t.

    The demand equals the far-field flux where the queue profile vanishes and
    the full capacity where a queue is present (or in the congested regime);
    the junction flux is the periodic profile F.
    """
    lam = float(f0(p0))
    congested = p0 > f0.b + 1e-12
    prof = flux_profile(lam, signal, congested=congested)
    if congested or prof.psi_at(t) > 1e-12:
        demand = f0.f_max
    else:
        demand = lam
    return demand, prof.F_at(t)


def exit_boundary(prof: FluxProfile, k: int) -> tuple[PeriodicBoundary, float]:
    """Boundary value of exit k: minus the running integral of F 1_{phase k}
    recentered by its mean mu_k; returns (boundary, mu_k)."""
    mu = prof.integral_F(k)
    lens = np.diff(prof.ts)
    rates = np.where(prof.phases == k, prof.Fs, 0.0) - mu
    vs = np.concatenate([[0.0], -np.cumsum(rates * lens)])
    vs[-1] = 0.0  # exact periodicity (integral of F over phase k is mu)
    return PeriodicBoundary(prof.ts, vs), mu


def exit_solution(prof: FluxProfile, fk: FluxFunction, k: int):
    """Profile machinery for exit k fed by the junction flux profile.

    Returns (HalfLineSolution, far-field density p_hat_k).
    """
    pb, mu = exit_boundary(prof, k)
    p_hat = float(fk.inv_plus(mu))
    g = RestrictedFlux(fk, lo=fk.a - p_hat, hi=fk.b - p_hat, shift=p_hat, offset=mu)
    return HalfLineSolution(g=g, psi=pb), p_hat


def exit_density(sol: HalfLineSolution, p_hat: float, t: float, x: float) -> float:
    """u_k(t, x) = p_hat_k + d/dx w_k through the optimizer."""
    p, _, _ = sol.gradient(t, x)
    return p_hat + p


# -- assembled correctors --------------------------------------------------


@dataclass(frozen=True)
class CorrectorField:
    """Exact time-periodic junction profile with prescribed far fields.

    case labels which stratum of the germ the far-field triple belongs to:
    "i" fluid split, "ii"/"iii" one exit blocked, "iv" fully congested.
    """

    case: str
    p: tuple[float, float, float]
    far: tuple[float, float, float]  # far-field densities per branch
    u0: Callable[[float, float], float]
    u1: Callable[[float, float], float]
    u2: Callable[[float, float], float]
    profile: FluxProfile | None

    def branch(self, j: int):
        return (self.u0, self.u1, self.u2)[j]

    def trace_triple(self, t: float, eps: float = 1e-6):
        return (self.u0(t, -eps), self.u1(t, eps), self.u2(t, eps))

    def junction_flux(self, t: float):
        if self.profile is None:
            return 0.0, 0.0, 0.0
        phi0 = self.profile.F_at(t)
        k = self.profile.phase_at(t)
        return (phi0, phi0, 0.0) if k == 1 else (phi0, 0.0, phi0)


def _constant(v: float) -> Callable[[float, float], float]:
    return lambda t, x: v


def classify_case(p, fluxes: FluxTriple, tol: float = 1e-9) -> str:
    c = (fluxes.f0.c, fluxes.f1.c, fluxes.f2.c)
    if all(abs(p[j] - c[j]) <= tol for j in range(3)):
        return "iv"
    if abs(p[2] - c[2]) <= tol:
        return "ii"
    if abs(p[1] - c[1]) <= tol:
        return "iii"
    if p[0] <= fluxes.f0.b + tol:
        return "i"
    raise ValueError("far-field triple is not in the characteristic subgerm")


def corrector(p, effective: EffectiveGerm, fluxes: FluxTriple) -> CorrectorField:
    """Build the periodic profile with far fields p = (p0, p1, p2).

    p must come from the characteristic subgerm of the homogenized germ
    (see effective.characteristic_subgerm).
    """
    signal = effective.signal
    case = classify_case(p, fluxes)
    if case == "iv":
        return CorrectorField(
            case, tuple(p), tuple(p),
            _constant(p[0]), _constant(p[1]), _constant(p[2]), None,
        )
    if case in ("ii", "iii"):
        k = 1 if case == "ii" else 2
        masked = signal.masked(k)
        bark = masked.mean()
        p0c = float(fluxes.f0.inv_minus(bark))
        sol0, prof, _ = incoming_solution(p0c, masked, fluxes.f0)
        solk, p_hat_k = exit_solution(prof, fluxes[k], k)
        uk = lambda t, x: exit_density(solk, p_hat_k, t, x)
        u0 = lambda t, x: incoming_density(sol0, p0c, True, t, x)
        blocked = _constant(fluxes[3 - k].c)
        far = [p0c, None, None]
        far[k] = p_hat_k
        far[3 - k] = fluxes[3 - k].c
        u1, u2 = (uk, blocked) if k == 1 else (blocked, uk)
        return CorrectorField(case, tuple(p), tuple(far), u0, u1, u2, prof)
    # fluid case
    p0 = float(p[0])
    sol0, prof, congested = incoming_solution(p0, signal, fluxes.f0)
    sol1, p_hat_1 = exit_solution(prof, fluxes.f1, 1)
    sol2, p_hat_2 = exit_solution(prof, fluxes.f2, 2)
    return CorrectorField(
        case,
        tuple(p),
        (p0, p_hat_1, p_hat_2),
        lambda t, x: incoming_density(sol0, p0, congested, t, x),
        lambda t, x: exit_density(sol1, p_hat_1, t, x),
        lambda t, x: exit_density(sol2, p_hat_2, t, x),
        prof,
    )


def decay_sup(field: CorrectorField, M: float, n_t: int = 24, n_x: int = 12) -> float:
    """sup over t and |x| in [M, 2M] of the distance to the far fields."""
    ts = np.linspace(0.0, 1.0, n_t, endpoint=False)
    xs = np.linspace(M, 2 * M, n_x)
    worst = 0.0
    for t in ts:
        for x in xs:
            worst = max(worst, abs(field.u0(t, -x) - field.far[0]))
            worst = max(worst, abs(field.u1(t, x) - field.far[1]))
            worst = max(worst, abs(field.u2(t, x) - field.far[2]))
    return worst


def queue_extent(field: CorrectorField, x_max: float = 20.0, n: int = 400) -> float:
    """Largest |x| where the incoming profile departs from its far field."""
    xs = -np.linspace(1e-6, x_max, n)
    ts = np.linspace(0.0, 1.0, 16, endpoint=False)
    extent = 0.0
    for t in ts:
        for x in xs:
            if abs(field.u0(t, x) - field.far[0]) > 1e-10:
                extent = max(extent, -x)
    return extent
