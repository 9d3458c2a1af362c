"""Concave flux functions, monotone envelopes, inverses and the Hopf-Lax kernel.

A flux lives on a density interval [a, c], vanishes at both ends, and is
strongly concave with its maximum f_max at an interior point b.  Two families
are supported:

- "quadratic": f(p) = 4 f_max (p - a)(c - p) / (c - a)^2, for which every
  derived quantity (envelopes, inverses, inverse derivative) is closed form;
- "sampled": a monotone cubic interpolant through user points, validated by a
  second-difference concavity test, with bisection inverses.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

_DOMAIN_TOL = 1e-9
_BISECT_TOL = 1e-12


class FluxDomainError(ValueError):
    """Density or flux argument outside the admissible range."""


@dataclass(frozen=True)
class FluxFunction:
    """Concave unimodal flux on [a, c] with f(a) = f(c) = 0."""

    a: float
    c: float
    f_max: float
    family: str = "quadratic"
    # sampled family only
    _interp: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)
    _dinterp: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)
    b: float = field(default=np.nan)
    concavity_delta: float = field(default=np.nan)

    def __post_init__(self):
        if not self.c > self.a:
            raise FluxDomainError("need a < c")
        if not self.f_max > 0:
            raise FluxDomainError("need f_max > 0")
        if self.family == "quadratic":
            width = self.c - self.a
            object.__setattr__(self, "b", 0.5 * (self.a + self.c))
            object.__setattr__(self, "concavity_delta", 8.0 * self.f_max / width**2)
        elif self.family != "sampled":
            raise FluxDomainError(f"unknown flux family {self.family!r}")

    # -- construction -----------------------------------------------------

    @staticmethod
    def quadratic(a: float, c: float, f_max: float) -> "FluxFunction":
        return FluxFunction(a=a, c=c, f_max=f_max)

    @staticmethod
    def from_samples(points: Sequence[Sequence[float]]) -> "FluxFunction":
        """Monotone-cubic flux through (p, f) samples.

        The samples must start and end at zero flux and pass a discrete
        concavity test; the argmax b and f_max are taken from the
        interpolant.
        """
        pts = np.asarray(sorted(points), dtype=float)
        ps, fs = pts[:, 0], pts[:, 1]
        if len(ps) < 4:
            raise FluxDomainError("need at least 4 sample points")
        if abs(fs[0]) > _DOMAIN_TOL or abs(fs[-1]) > _DOMAIN_TOL:
            raise FluxDomainError("sampled flux must vanish at both endpoints")
        interp = PchipInterpolator(ps, fs)
        dinterp = interp.derivative()
        # second-difference concavity check on a fine grid
        grid = np.linspace(ps[0], ps[-1], 512)
        h = grid[1] - grid[0]
        vals = interp(grid)
        d2 = (vals[:-2] - 2 * vals[1:-1] + vals[2:]) / h**2
        delta = -float(np.max(d2))
        if delta <= 0:
            raise FluxDomainError("sampled flux fails the concavity test")
        # argmax of the interpolant: zero of the derivative
        k = int(np.argmax(vals))
        lo = grid[max(k - 1, 0)]
        hi = grid[min(k + 1, len(grid) - 1)]
        if dinterp(lo) > 0 > dinterp(hi):
            b = brentq(dinterp, lo, hi, xtol=_BISECT_TOL)
        else:
            b = grid[k]
        f = FluxFunction(
            a=float(ps[0]), c=float(ps[-1]), f_max=float(interp(b)),
            family="sampled", _interp=interp, _dinterp=dinterp,
        )
        object.__setattr__(f, "b", float(b))
        object.__setattr__(f, "concavity_delta", delta)
        return f

    # -- evaluation -------------------------------------------------------

    def _check_domain(self, p):
        p = np.asarray(p, dtype=float)
        if np.any(p < self.a - _DOMAIN_TOL) or np.any(p > self.c + _DOMAIN_TOL):
            raise FluxDomainError(f"density outside [{self.a}, {self.c}]")
        return np.clip(p, self.a, self.c)

    def __call__(self, p):
        p = self._check_domain(p)
        if self.family == "quadratic":
            return 4.0 * self.f_max * (p - self.a) * (self.c - p) / (self.c - self.a) ** 2
        return self._interp(p)

    def deriv(self, p):
        p = self._check_domain(p)
        if self.family == "quadratic":
            return 4.0 * self.f_max * (self.a + self.c - 2.0 * p) / (self.c - self.a) ** 2
        return self._dinterp(p)

    def deriv_inv(self, m):
        """Inverse of f' (f' is decreasing); clipped to [a, c]."""
        if self.family == "quadratic":
            p = 0.5 * (self.a + self.c) - np.asarray(m, dtype=float) * (self.c - self.a) ** 2 / (8.0 * self.f_max)
            return np.clip(p, self.a, self.c)
        m_arr = np.asarray(m, dtype=float)
        scalar = m_arr.ndim == 0
        m_arr = np.atleast_1d(m_arr)
        out = np.empty_like(m_arr)
        dlo, dhi = float(self._dinterp(self.a)), float(self._dinterp(self.c))
        for i, mi in enumerate(m_arr):
            if mi >= dlo:
                out[i] = self.a
            elif mi <= dhi:
                out[i] = self.c
            else:
                out[i] = brentq(lambda p: float(self._dinterp(p)) - mi, self.a, self.c, xtol=_BISECT_TOL)
        return out[0] if scalar else out

    def max_speed(self) -> float:
        """Bound on |f'| over the whole interval."""
        if self.family == "quadratic":
            return 4.0 * self.f_max / (self.c - self.a)
        grid = np.linspace(self.a, self.c, 512)
        return float(np.max(np.abs(self._dinterp(grid))))

    # -- envelopes and inverses -------------------------------------------

    def envelope_plus(self, p):
        """Demand: f on [a, b], f_max past b (nondecreasing envelope)."""
        p = self._check_domain(p)
        return self(np.minimum(p, self.b))

    def envelope_minus(self, p):
        """Supply: f_max before b, f on [b, c] (nonincreasing envelope)."""
        p = self._check_domain(p)
        return self(np.maximum(p, self.b))

    def _check_range(self, lam):
        lam = np.asarray(lam, dtype=float)
        if np.any(lam < -_DOMAIN_TOL) or np.any(lam > self.f_max + _DOMAIN_TOL):
            raise FluxDomainError(f"flux value outside [0, {self.f_max}]")
        return np.clip(lam, 0.0, self.f_max)

    def inv_plus(self, lam):
        """u_plus(lam) in [a, b] with f = lam on the increasing branch."""
        lam = self._check_range(lam)
        if self.family == "quadratic":
            r = np.sqrt(np.maximum(1.0 - lam / self.f_max, 0.0))
            return self.a + 0.5 * (self.c - self.a) * (1.0 - r)
        return self._inv_bisect(lam, self.a, self.b)

    def inv_minus(self, lam):
        """u_minus(lam) in [b, c] with f = lam on the decreasing branch."""
        lam = self._check_range(lam)
        if self.family == "quadratic":
            r = np.sqrt(np.maximum(1.0 - lam / self.f_max, 0.0))
            return self.a + 0.5 * (self.c - self.a) * (1.0 + r)
        return self._inv_bisect(lam, self.b, self.c)

    def _inv_bisect(self, lam, lo, hi):
        lam_arr = np.atleast_1d(np.asarray(lam, dtype=float))
        scalar = np.asarray(lam).ndim == 0
        out = np.empty_like(lam_arr)
        flo, fhi = float(self(lo)), float(self(hi))
        for i, li in enumerate(lam_arr):
            li = min(max(li, min(flo, fhi)), max(flo, fhi))
            out[i] = brentq(lambda p: float(self(p)) - li, lo, hi, xtol=_BISECT_TOL)
        return out[0] if scalar else out

    # -- reversal ---------------------------------------------------------

    def reverse(self) -> "FluxFunction":
        """Mirror flux p -> f(-p) on [-c, -a]; an involution."""
        if self.family == "quadratic":
            return FluxFunction(a=-self.c, c=-self.a, f_max=self.f_max)
        grid = np.linspace(self.a, self.c, 257)
        pts = [(-p, float(self(p))) for p in grid]
        return FluxFunction.from_samples(pts)


@dataclass(frozen=True)
class RestrictedFlux:
    """An increasing flux branch g(p) = base(orient * p + shift) - offset on [lo, hi].

    orient = +1 keeps the base orientation, orient = -1 mirrors it.  The
    restriction must be strictly increasing on [lo, hi], which callers arrange
    by choosing the monotone branch of the base flux.
    """

    base: FluxFunction
    lo: float
    hi: float
    shift: float = 0.0
    offset: float = 0.0
    orient: int = 1

    def __post_init__(self):
        if not self.hi > self.lo:
            raise FluxDomainError("need lo < hi")
        if self(self.hi) < self(self.lo):
            raise FluxDomainError("restriction is not increasing")

    def __call__(self, p):
        p = np.clip(np.asarray(p, dtype=float), self.lo, self.hi)
        return self.base(self.orient * p + self.shift) - self.offset

    def deriv(self, p):
        p = np.clip(np.asarray(p, dtype=float), self.lo, self.hi)
        return self.orient * self.base.deriv(self.orient * p + self.shift)

    def deriv_inv(self, m):
        """Inverse of g' clipped to [lo, hi]."""
        q = self.base.deriv_inv(self.orient * np.asarray(m, dtype=float))
        p = self.orient * (q - self.shift)
        return np.clip(p, self.lo, self.hi)

    def inverse(self, v):
        """g^{-1}(v) on [lo, hi], clipped to the value range.

        Routed through the base flux's branch inverses: the image of [lo, hi]
        under p -> orient p + shift lies on a single monotone branch of the
        base, so the quadratic family stays closed form.
        """
        v_arr = np.atleast_1d(np.asarray(v, dtype=float))
        scalar = np.asarray(v).ndim == 0
        glo, ghi = self.value_range()
        v_clip = np.clip(v_arr, glo, ghi)
        q_ends = sorted((self.orient * self.lo + self.shift, self.orient * self.hi + self.shift))
        lam = v_clip + self.offset
        if q_ends[1] <= self.base.b + 1e-12:
            q = self.base.inv_plus(lam)
            p = self.orient * (q - self.shift)
        elif q_ends[0] >= self.base.b - 1e-12:
            q = self.base.inv_minus(lam)
            p = self.orient * (q - self.shift)
        else:
            p = np.array([
                brentq(lambda u: float(self(u)) - vi, self.lo, self.hi, xtol=_BISECT_TOL)
                for vi in v_clip
            ])
        p = np.clip(np.atleast_1d(p), self.lo, self.hi)
        return float(p[0]) if scalar else p

    def value_range(self) -> tuple[float, float]:
        return float(self(self.lo)), float(self(self.hi))


def fundamental_xi(g: RestrictedFlux, s: float, y: float) -> tuple[float, float]:
    """Hopf-Lax kernel xi(s, y) = max_p (-p y + s g(p)) with its argmax.

    Requires s >= 0 and y >= 0.  The maximizer is the clipped inverse
    derivative p_hat = clip(g'^{-1}(y/s), lo, hi); no numerical optimization.
    Returns (value, p_hat).
    """
    if s < 0 or y < 0:
        raise FluxDomainError("fundamental_xi needs s >= 0 and y >= 0")
    if s == 0.0:
        p_hat = g.lo if y > 0 else g.hi
        return -p_hat * y, p_hat
    p_hat = float(g.deriv_inv(y / s))
    return -p_hat * y + s * float(g(p_hat)), p_hat
