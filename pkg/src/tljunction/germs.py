"""Entropy dissipation and junction germs for a 1:2 node.

A germ is a set of density triples P = (p0, p1, p2) that the junction admits
as traces.  The family handled here is parametrized by flux limiters
(bar0, bar1, bar2) with bar0 = bar1 + bar2 and two monotone split curves
hat1, hat2 with hat1 + hat2 = min(lambda, bar0).  Membership of P requires

  - flux balance f0(p0) = f1(p1) + f2(p2),
  - 0 <= fj(pj) <= bar_j on every branch,
  - demand condition f_k^+(p_k) >= hat_k(f_0^+(p_0)) on both exits,

and the defining property is nonnegative pairwise dissipation
D(Pbar, P) = q0 - q1 - q2 >= 0 built from the Kruzkov entropy fluxes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .flux import FluxFunction
from .signals import Signal


@dataclass(frozen=True)
class FluxTriple:
    """The three branch fluxes of a 1:2 junction (0 in, 1 and 2 out)."""

    f0: FluxFunction
    f1: FluxFunction
    f2: FluxFunction

    def __iter__(self):
        return iter((self.f0, self.f1, self.f2))

    def __getitem__(self, j):
        return (self.f0, self.f1, self.f2)[j]

    def box(self) -> list[tuple[float, float]]:
        return [(f.a, f.c) for f in self]

    def in_box(self, P, tol: float = 1e-9) -> bool:
        return all(f.a - tol <= p <= f.c + tol for f, p in zip(self, P))

    def reverse(self) -> "FluxTriple":
        return FluxTriple(self.f0.reverse(), self.f1.reverse(), self.f2.reverse())

    def max_speed(self) -> float:
        return max(f.max_speed() for f in self)


@dataclass(frozen=True)
class PiecewiseLinear:
    """Monotone piecewise-linear curve with explicit breakpoints."""

    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        ys = np.asarray(self.ys, dtype=float)
        if xs.ndim != 1 or xs.shape != ys.shape or len(xs) < 2:
            raise ValueError("breakpoint arrays must be equal-length 1d, len >= 2")
        if np.any(np.diff(xs) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    def __call__(self, x):
        return np.interp(x, self.xs, self.ys)


@dataclass(frozen=True)
class GermParams:
    """Limiters and split curves defining one germ of the family."""

    bar0: float
    bar1: float
    bar2: float
    hat1: PiecewiseLinear
    hat2: PiecewiseLinear

    def validate(self, tol: float = 1e-8) -> None:
        if abs(self.bar0 - self.bar1 - self.bar2) > 1e-10:
            raise ValueError("bar0 must equal bar1 + bar2")
        for k, hat, bark in ((1, self.hat1, self.bar1), (2, self.hat2, self.bar2)):
            if abs(float(hat(0.0))) > tol:
                raise ValueError(f"hat{k}(0) != 0")
            if abs(float(hat(self.bar0)) - bark) > tol:
                raise ValueError(f"hat{k}(bar0) != bar{k}")
            if np.any(np.diff(hat.ys) < -tol):
                raise ValueError(f"hat{k} not nondecreasing")
            if np.any(hat.ys < -tol) or np.any(hat.ys > bark + tol):
                raise ValueError(f"hat{k} outside [0, bar{k}]")
        xs = np.union1d(self.hat1.xs, self.hat2.xs)
        total = self.hat1(xs) + self.hat2(xs)
        if np.max(np.abs(total - np.minimum(xs, self.bar0))) > tol:
            raise ValueError("hat1 + hat2 != min(lambda, bar0)")


def constant_split_params(bar1: float, bar2: float, f0_max: float) -> GermParams:
    """Fixed-priority germ: hat_k(lambda) proportional until its cap."""
    bar0 = bar1 + bar2
    xs = np.unique(np.array([0.0, bar0, max(f0_max, bar0 + 1e-12)]))
    frac1 = bar1 / bar0 if bar0 > 0 else 0.0
    hat1 = PiecewiseLinear(xs, np.minimum(xs * frac1, bar1) if bar0 > 0 else np.zeros_like(xs))
    hat2 = PiecewiseLinear(xs, np.minimum(xs, bar0) - hat1(xs))
    return GermParams(bar0, bar1, bar2, hat1, hat2)


# -- entropy machinery ----------------------------------------------------


def entropy_flux(f: FluxFunction, p_bar, p):
    """Kruzkov entropy flux q(p_bar, p) = sign(p - p_bar) (f(p) - f(p_bar))."""
    return np.sign(np.asarray(p) - p_bar) * (f(p) - f(p_bar))


def dissipation(fluxes: FluxTriple, P_bar, P, signs=(1.0, -1.0, -1.0)):
    """Node dissipation: incoming minus outgoing entropy flux.

    signs gives the road orientation; the default (+1, -1, -1) is the 1:2
    junction, (-1, +1, +1) is its 2:1 reversal.
    """
    total = 0.0
    for j in range(3):
        total = total + signs[j] * entropy_flux(fluxes[j], P_bar[j], P[j])
    return total


def rh_residual(fluxes: FluxTriple, P):
    """Flux balance defect f0(p0) - f1(p1) - f2(p2)."""
    return fluxes.f0(P[0]) - fluxes.f1(P[1]) - fluxes.f2(P[2])


# -- membership -----------------------------------------------------------


def germ_violation(params: GermParams, fluxes: FluxTriple, P) -> float:
    """Largest constraint defect of the triple P; zero means membership.

    Aggregates the box excess, the flux-balance defect, the limiter-cap
    excess, and the demand-condition deficit, all in flux units except the
    box term.
    """
    worst = 0.0
    for j, (lo, hi) in enumerate(fluxes.box()):
        worst = max(worst, lo - P[j], P[j] - hi)
    Pc = [min(max(P[j], fluxes[j].a), fluxes[j].c) for j in range(3)]
    vals = [float(fluxes[j](Pc[j])) for j in range(3)]
    bars = (params.bar0, params.bar1, params.bar2)
    worst = max(worst, abs(vals[0] - vals[1] - vals[2]))
    for v, bar in zip(vals, bars):
        worst = max(worst, -v, v - bar)
    d0 = float(fluxes.f0.envelope_plus(Pc[0]))
    for k, hat in ((1, params.hat1), (2, params.hat2)):
        worst = max(worst, float(hat(d0)) - float(fluxes[k].envelope_plus(Pc[k])))
    return worst


def germ_contains(params: GermParams, fluxes: FluxTriple, P, tol: float = 1e-8) -> bool:
    """Whether the triple P belongs to the germ, within absolute flux tol."""
    return germ_violation(params, fluxes, P) <= tol


def germ_contains_batch(params, fluxes, p0, p1, p2, tol: float = 1e-8):
    """Vectorized membership over arrays of triples; returns a boolean array."""
    v0, v1, v2 = fluxes.f0(p0), fluxes.f1(p1), fluxes.f2(p2)
    ok = np.abs(v0 - v1 - v2) <= tol
    for v, bar in ((v0, params.bar0), (v1, params.bar1), (v2, params.bar2)):
        ok &= (v >= -tol) & (v <= bar + tol)
    d0 = fluxes.f0.envelope_plus(p0)
    ok &= fluxes.f1.envelope_plus(p1) >= params.hat1(d0) - tol
    ok &= fluxes.f2.envelope_plus(p2) >= params.hat2(d0) - tol
    return ok


def gamma_point(params: GermParams, fluxes: FluxTriple, lam: float):
    """Fluid-curve point at total flux lam: all branches on the rising branch."""
    return (
        float(fluxes.f0.inv_plus(lam)),
        float(fluxes.f1.inv_plus(float(params.hat1(lam)))),
        float(fluxes.f2.inv_plus(float(params.hat2(lam)))),
    )


def special_points(params: GermParams, fluxes: FluxTriple):
    """The isolated members P1 (exit 2 blocked), P2 (exit 1 blocked), P3 (jam)."""
    p1 = (
        float(fluxes.f0.inv_minus(params.bar1)),
        float(fluxes.f1.inv_plus(params.bar1)),
        fluxes.f2.c,
    )
    p2 = (
        float(fluxes.f0.inv_minus(params.bar2)),
        fluxes.f1.c,
        float(fluxes.f2.inv_plus(params.bar2)),
    )
    p3 = (fluxes.f0.c, fluxes.f1.c, fluxes.f2.c)
    return p1, p2, p3


def generator_set(params: GermParams, fluxes: FluxTriple, n: int):
    """The generating subset: the fluid curve sampled at n fluxes plus P1, P2, P3."""
    if n < 2:
        raise ValueError("need n >= 2 samples of the fluid curve")
    pts = [gamma_point(params, fluxes, lam) for lam in np.linspace(0.0, params.bar0, n)]
    pts.extend(special_points(params, fluxes))
    return pts


def sample_germ(params: GermParams, fluxes: FluxTriple, n: int, rng: np.random.Generator):
    """Draw n triples from the germ via its natural strata.

    Uniform box sampling almost never hits the germ (it has measure zero), so
    the draw walks the strata directly: the fluid curve, the two-parameter
    congested sheet, the one-exit-saturated edges, and the isolated points.
    Every candidate is re-checked through germ_contains before being returned.
    """
    out = []
    p1s, p2s, p3 = special_points(params, fluxes)
    fixed = [gamma_point(params, fluxes, 0.0), p1s, p2s, p3]
    while len(out) < n:
        r = rng.random()
        if r < 0.35:
            P = gamma_point(params, fluxes, rng.random() * params.bar0)
        elif r < 0.70:
            s1 = rng.random() * params.bar1
            s2 = rng.random() * params.bar2
            P = (
                float(fluxes.f0.inv_minus(s1 + s2)),
                float(fluxes.f1.inv_minus(s1)),
                float(fluxes.f2.inv_minus(s2)),
            )
        elif r < 0.80 and params.bar2 > 0:
            s2 = rng.random() * params.bar2
            P = (
                float(fluxes.f0.inv_minus(params.bar1 + s2)),
                float(fluxes.f1.inv_plus(params.bar1)),
                float(fluxes.f2.inv_minus(s2)),
            )
        elif r < 0.90 and params.bar1 > 0:
            s1 = rng.random() * params.bar1
            P = (
                float(fluxes.f0.inv_minus(s1 + params.bar2)),
                float(fluxes.f1.inv_minus(s1)),
                float(fluxes.f2.inv_plus(params.bar2)),
            )
        else:
            P = fixed[rng.integers(len(fixed))]
        if germ_contains(params, fluxes, P, tol=1e-9):
            out.append(P)
    return out


def check_germ_property(
    params: GermParams,
    fluxes: FluxTriple,
    n_pairs: int,
    rng: np.random.Generator | None = None,
) -> float:
    """Min dissipation over n_pairs random germ pairs; expected >= -1e-9."""
    rng = rng or np.random.default_rng(0)
    pool_size = max(2, int(np.ceil(np.sqrt(2 * n_pairs))) + 8)
    pool = sample_germ(params, fluxes, pool_size, rng)
    arr = np.array(pool)
    worst = np.inf
    idx_a = rng.integers(len(pool), size=n_pairs)
    idx_b = rng.integers(len(pool), size=n_pairs)
    # group by the left point so the right side vectorizes
    for i in np.unique(idx_a):
        P_bar = arr[i]
        sel = arr[idx_b[idx_a == i]]
        d = dissipation(fluxes, P_bar, (sel[:, 0], sel[:, 1], sel[:, 2]))
        worst = min(worst, float(np.min(d)))
    return worst


def check_generation(
    params: GermParams,
    fluxes: FluxTriple,
    grid_res: int,
    n_gamma: int = 33,
    tol_d: float = 1e-11,
    tol_factor: float = 5.0,
):
    """Grid certificate that the generator set generates the germ.

    Scans a grid_res^3 grid of the box: any triple dissipating nonnegatively
    (>= -tol_d) against every generator must pass membership at tolerance
    tol_factor * diameter / grid_res.  Returns the list of counterexamples.
    """
    if grid_res < 10:
        raise ValueError("grid_res must be at least 10")
    axes = [np.linspace(f.a, f.c, grid_res) for f in fluxes]
    P0, P1, P2 = np.meshgrid(*axes, indexing="ij")
    p0, p1, p2 = P0.ravel(), P1.ravel(), P2.ravel()
    min_d = np.full(p0.shape, np.inf)
    for P_bar in generator_set(params, fluxes, n_gamma):
        d = dissipation(fluxes, P_bar, (p0, p1, p2))
        np.minimum(min_d, d, out=min_d)
    candidates = min_d >= -tol_d
    diam = float(np.linalg.norm([f.c - f.a for f in fluxes]))
    tol_m = tol_factor * diam / grid_res
    member = germ_contains_batch(params, fluxes, p0, p1, p2, tol=tol_m)
    bad = candidates & ~member
    return [
        (float(p0[i]), float(p1[i]), float(p2[i]), float(min_d[i]))
        for i in np.flatnonzero(bad)
    ]


# -- instantaneous (light-phase) germs ------------------------------------


def meso_germ_params(signal: Signal, fluxes: FluxTriple, t: float) -> GermParams:
    """The one-phase germ active at time t: limiter A(t) on the green branch."""
    a = signal.A(t)
    k = signal.phase(t)
    f0_max = fluxes.f0.f_max
    hi = max(f0_max, a + 1.0)
    if a > 0:
        xs = np.array([0.0, a, hi])
        active = PiecewiseLinear(xs, np.array([0.0, a, a]))
        idle = PiecewiseLinear(xs, np.zeros(3))
    else:
        xs = np.array([0.0, hi])
        active = PiecewiseLinear(xs, np.zeros(2))
        idle = PiecewiseLinear(xs, np.zeros(2))
    if k == 1:
        return GermParams(a, a, 0.0, active, idle)
    return GermParams(a, 0.0, a, idle, active)


def meso_contains_direct(
    signal: Signal, fluxes: FluxTriple, t: float, P, tol: float = 1e-8
) -> bool:
    """Direct form of the one-phase germ: the idle exit carries zero flux and
    min(A, demand of road 0, supply of the green exit) equals both active
    fluxes."""
    k = signal.phase(t)
    a = signal.A(t)
    other = 2 if k == 1 else 1
    if abs(float(fluxes[other](P[other]))) > tol:
        return False
    lam = min(
        a,
        float(fluxes.f0.envelope_plus(P[0])),
        float(fluxes[k].envelope_minus(P[k])),
    )
    return (
        abs(float(fluxes.f0(P[0])) - lam) <= tol
        and abs(float(fluxes[k](P[k])) - lam) <= tol
    )


# -- reversion (2:1 junctions) --------------------------------------------


def reverse_triple(P):
    """Density transform between a 1:2 triple and its 2:1 mirror."""
    return (-P[0], -P[1], -P[2])


def germ_contains_merge(
    params: GermParams, rev_fluxes: FluxTriple, P, tol: float = 1e-8
) -> bool:
    """Membership in the merge-junction (2:1) germ for reversed fluxes.

    rev_fluxes must be fluxes.reverse() of the diverge problem; road 0 is now
    outgoing so the demand conditions use the supply envelopes.
    """
    if not rev_fluxes.in_box(P, tol):
        return False
    vals = [float(rev_fluxes[j](P[j])) for j in range(3)]
    bars = (params.bar0, params.bar1, params.bar2)
    if abs(vals[0] - vals[1] - vals[2]) > tol:
        return False
    for v, bar in zip(vals, bars):
        if v < -tol or v > bar + tol:
            return False
    s0 = float(rev_fluxes.f0.envelope_minus(P[0]))
    for k, hat in ((1, params.hat1), (2, params.hat2)):
        if float(rev_fluxes[k].envelope_minus(P[k])) < float(hat(s0)) - tol:
            return False
    return True
