"""Homogenized germ parameters from a periodic limiter signal.

The central objects are, for a target total flux lam = f0(p0):

- psi(t): the running-max of the integral of (lam - A), the periodic boundary
  value of the incoming-road profile;
- F(t): the periodic junction flux, lam - psi'(t), piecewise constant;
- the effective limiters bar_k = int_{I_k} A and split curves
  hat_k(lam) = int_{I_k} F_lam.

Everything is breakpoint-exact: for piecewise-constant A the running integral
is piecewise linear, so maxima are attained on a finite candidate set and all
integrals are finite sums.  No quadrature anywhere.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass

import numpy as np

from .flux import FluxFunction
from .germs import FluxTriple, GermParams, PiecewiseLinear, gamma_point, special_points
from .signals import Signal


def psi(lam: float, signal: Signal, t: float, congested: bool = False) -> float:
    """Periodic boundary profile for total flux lam.

    Default form: max over t1 <= t of int_{t1}^t (lam - A); nonnegative and
    1-periodic, requires lam <= mean(A).  The congested form (used at the
    saturated endpoint where lam = mean(A)) is the plain integral from 0,
    which is 1-periodic but may change sign.
    """
    if congested:
        return lam * t - signal.antiderivative(t)
    if lam > signal.mean() + 1e-12:
        raise ValueError("psi needs lam <= mean(A)")
    b_t = signal.antiderivative(t)
    cands = np.concatenate([signal.extended_breakpoints(t - 1.0, t), [t - 1.0, t]])
    best = np.max(lam * (t - cands) - (b_t - signal.antiderivative(cands)))
    return max(float(best), 0.0)


@dataclass(frozen=True)
class FluxProfile:
    """Piecewise representation of psi (linear) and F (constant) on [0, 1]."""

    lam: float
    congested: bool
    ts: np.ndarray      # refined breakpoints, ts[0] = 0, ts[-1] = 1
    psis: np.ndarray    # psi at those breakpoints
    Fs: np.ndarray      # junction flux on [ts[i], ts[i+1]); len = len(ts) - 1
    phases: np.ndarray  # active phase per piece

    def psi_at(self, t: float) -> float:
        tau = t - np.floor(t)
        return float(np.interp(tau, self.ts, self.psis))

    def _piece(self, t: float) -> int:
        tau = t - np.floor(t)
        i = bisect.bisect_right(self.ts, tau + 1e-15) - 1
        return min(max(i, 0), len(self.Fs) - 1)

    def F_at(self, t: float) -> float:
        return float(self.Fs[self._piece(t)])

    def phase_at(self, t: float) -> int:
        return int(self.phases[self._piece(t)])

    def integral_F(self, k: int | None = None) -> float:
        """Integral of F over one period, optionally restricted to phase k."""
        lens = np.diff(self.ts)
        if k is None:
            return float(np.sum(self.Fs * lens))
        return float(np.sum(self.Fs[self.phases == k] * lens[self.phases == k]))


def flux_profile(lam: float, signal: Signal, congested: bool = False) -> FluxProfile:
    """Exact psi/F representation for one period.

    Within one limiter segment psi is linear except for at most one kink where
    it hits zero; those kinks are inserted so that every returned piece has
    constant F.
    """
    ts: list[float] = []
    psis: list[float] = []
    Fs: list[float] = []
    phases: list[int] = []
    for seg in signal.segments:
        pl = psi(lam, signal, seg.start, congested)
        pr = psi(lam, signal, seg.end, congested)
        if congested:
            ts.append(seg.start)
            psis.append(pl)
            Fs.append(seg.A)
            phases.append(seg.phase)
            continue
        slope = lam - seg.A
        hit = None
        if pl > 0.0 and slope < 0.0:
            t_star = seg.start + pl / (seg.A - lam)
            if t_star < seg.end - 1e-14:
                hit = t_star
        if hit is None:
            ts.append(seg.start)
            psis.append(pl)
            # F = A wherever psi > 0 in the open piece, else lam
            Fs.append(seg.A if max(pl, pr) > 1e-14 else lam)
            phases.append(seg.phase)
        else:
            ts.extend([seg.start, hit])
            psis.extend([pl, 0.0])
            Fs.extend([seg.A, lam])
            phases.extend([seg.phase, seg.phase])
    ts.append(1.0)
    psis.append(psi(lam, signal, 1.0, congested))
    return FluxProfile(
        lam=lam,
        congested=congested,
        ts=np.array(ts),
        psis=np.array(psis),
        Fs=np.array(Fs),
        phases=np.array(phases),
    )


def junction_flux_profile(lam: float, signal: Signal, t: float, congested: bool = False) -> float:
    """The periodic junction flux F_lam(t) = lam - psi'(t); F = A where the
    queue profile is positive, lam where it vanishes."""
    return flux_profile(lam, signal, congested).F_at(t)


def effective_limiters(signal: Signal, fluxes: FluxTriple) -> tuple[float, float, float]:
    """Time-averaged limiters (bar0, bar1, bar2); validates the pointwise caps."""
    signal.validate_caps(fluxes.f0.f_max, fluxes.f1.f_max, fluxes.f2.f_max)
    bar1 = signal.phase_integral(1)
    bar2 = signal.phase_integral(2)
    return bar1 + bar2, bar1, bar2


def hat_lambda(signal: Signal, k: int, lam: float) -> float:
    """Effective split: int of F_lam over the phase-k set, extended flat past
    the saturation point mean(A).

    Uses the exact identity int_{t1}^{t2} F = psi(t1) - psi(t2) + lam (t2-t1),
    so only psi values at the fixed phase boundaries are needed.
    """
    bar0 = signal.mean()
    bark = signal.phase_integral(k)
    if lam >= bar0 - 1e-14:
        return bark
    total = 0.0
    for t1, t2 in signal.phase_intervals(k):
        total += psi(lam, signal, t1) - psi(lam, signal, t2) + lam * (t2 - t1)
    return total


def split_kinks(signal: Signal) -> np.ndarray:
    """Flux values where the split curves can kink.

    psi at a fixed time is a max of finitely many functions affine in lam, one
    per candidate start time; two candidates swap exactly at lam equal to the
    mean of A over the interval between them.  All pairwise interval means of
    the periodic breakpoints (gaps up to one period) therefore contain every
    kink of hat_k.
    """
    pts = signal.extended_breakpoints(0.0, 2.0)
    bar0 = signal.mean()
    B = signal.antiderivative(pts)
    gaps = pts[None, :] - pts[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        means = (B[None, :] - B[:, None]) / gaps
    keep = (gaps > 1e-14) & (gaps <= 1.0 + 1e-12)
    vals = means[keep]
    vals = vals[(vals >= -1e-12) & (vals <= bar0 + 1e-12)]
    return np.unique(np.clip(vals, 0.0, bar0))


@dataclass(frozen=True)
class EffectiveGerm:
    """Homogenized germ parameters plus provenance of their construction."""

    params: GermParams
    signal: Signal
    n_fill: int

    @property
    def bar0(self):
        return self.params.bar0


def build_effective_germ(signal: Signal, fluxes: FluxTriple, n_fill: int = 256) -> EffectiveGerm:
    """Tabulate the split curves on a kink-aware grid and assemble the germ.

    The grid carries every kink candidate (see split_kinks) plus n_fill
    uniform points, so linear interpolation between table entries is exact up
    to roundoff.
    """
    bar0, bar1, bar2 = effective_limiters(signal, fluxes)
    f0_max = fluxes.f0.f_max
    grid = np.concatenate([
        np.array([0.0, bar0, f0_max]),
        split_kinks(signal),
        np.linspace(0.0, f0_max, n_fill),
    ])
    grid = np.unique(np.clip(grid, 0.0, f0_max))
    h1 = np.array([hat_lambda(signal, 1, lam) for lam in grid])
    h1 = np.clip(h1, 0.0, bar1)
    h1 = np.maximum.accumulate(h1)
    h2 = np.minimum(grid, bar0) - h1
    params = GermParams(bar0, bar1, bar2, PiecewiseLinear(grid, h1), PiecewiseLinear(grid, h2))
    params.validate()
    return EffectiveGerm(params=params, signal=signal, n_fill=n_fill)


def hat_p(effective: EffectiveGerm, fluxes: FluxTriple, k: int, p0: float) -> float:
    """Far-field exit density for incoming density p0 on the rising branch."""
    lam = float(fluxes.f0(p0))
    if p0 > fluxes.f0.b + 1e-9 or lam > effective.bar0 + 1e-9:
        raise ValueError("p0 must be fluid with flux at most bar0")
    hat = effective.params.hat1 if k == 1 else effective.params.hat2
    return float(fluxes[k].inv_plus(float(hat(lam))))


# -- obstacle-problem cross-check -----------------------------------------


def obstacle_phi(lam: float, signal: Signal, t: float) -> float:
    """Running-obstacle value Phi_lam(t) = sup_{tau >= 0} B(t - tau) + lam tau,
    with B the exact antiderivative of A.  Satisfies Phi - B = psi."""
    bar0 = signal.mean()
    if lam < -1e-12 or lam > bar0 + 1e-12:
        raise ValueError("lam must lie in [0, mean(A)]")
    cands = list(signal.extended_breakpoints(t - 2.0, t)) + [t - 2.0, t]
    return max(signal.antiderivative(t1) + lam * (t - t1) for t1 in cands)


def obstacle_junction_flux(lam: float, signal: Signal, t: float) -> float:
    """Independent route to F: lam + A - Phi', with Phi' taken piecewise on the
    same refinement as flux_profile (Phi is piecewise linear)."""
    prof = flux_profile(lam, signal)
    i = prof._piece(t)
    t1, t2 = prof.ts[i], prof.ts[i + 1]
    slope = (obstacle_phi(lam, signal, t2) - obstacle_phi(lam, signal, t1)) / (t2 - t1)
    a = signal.A(0.5 * (t1 + t2))
    return lam + a - slope


# -- characteristic subgerm ------------------------------------------------


def characteristic_subgerm(effective: EffectiveGerm, fluxes: FluxTriple, n: int):
    """The generating triples of the homogenized germ with case labels:
    the fluid curve (i), the two one-exit-blocked points (ii)/(iii), and the
    fully congested point (iv)."""
    params = effective.params
    out = [("i", gamma_point(params, fluxes, lam)) for lam in np.linspace(0.0, params.bar0, n)]
    p1, p2, p3 = special_points(params, fluxes)
    out.append(("ii", p1))
    out.append(("iii", p2))
    out.append(("iv", p3))
    return out


# -- step approximation of a continuous limiter ---------------------------


def step_signal_from_profile(A, t_split: float, n_steps: int) -> Signal:
    """Midpoint step approximation of a continuous 1-periodic limiter.

    Phase 1 occupies [0, t_split), phase 2 the rest; t_split is snapped to the
    step grid.
    """
    edges = np.linspace(0.0, 1.0, n_steps + 1)
    entries = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid = 0.5 * (lo + hi)
        entries.append((hi - lo, float(A(mid)), 1 if mid < t_split else 2))
    return Signal.from_durations(entries)


def example_concave_hat(A, t_split: float, n_steps: int, n_lam: int = 257):
    """Split curve of a continuous unimodal limiter via step approximation.

    A must be continuous, 1-periodic, decreasing through its mean at t = 0 and
    on [0, t_split].  Returns (lambdas, hat1 values, signal); the curve
    converges to the closed form of the continuous problem as n_steps grows.
    """
    if not 0.0 < t_split < 1.0:
        raise ValueError("t_split must lie in (0, 1)")
    if A(0.25 * t_split) <= A(0.75 * t_split):
        raise ValueError("limiter must be decreasing on the phase-1 window")
    sig = step_signal_from_profile(A, t_split, n_steps)
    bar0 = sig.mean()
    lams = np.linspace(0.0, bar0, n_lam)
    hats = np.array([hat_lambda(sig, 1, lam) for lam in lams])
    return lams, hats, sig
