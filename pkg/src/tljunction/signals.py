"""Period-1 piecewise-constant flux limiter A(t) with a two-phase partition.

The limiter models a traffic light at the node: at each instant one of the two
exit branches holds the green phase and the through-flux is capped at A(t).
All integrals against A are breakpoint-exact sums; A is right-continuous at
its breakpoints.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Segment:
    start: float
    end: float
    A: float
    phase: int  # 1 or 2: which exit branch is active

    @property
    def duration(self) -> float:
        return self.end - self.start


class SignalError(ValueError):
    """Invalid limiter description."""


@dataclass(frozen=True)
class Signal:
    """1-periodic piecewise-constant limiter with phase labels."""

    segments: tuple[Segment, ...]

    def __post_init__(self):
        segs = self.segments
        if not segs:
            raise SignalError("signal needs at least one segment")
        if abs(segs[0].start) > 1e-12 or abs(segs[-1].end - 1.0) > 1e-12:
            raise SignalError("segments must cover [0, 1)")
        for s, s2 in zip(segs, segs[1:]):
            if abs(s.end - s2.start) > 1e-12:
                raise SignalError("segments must be contiguous")
        for s in segs:
            if s.duration <= 0:
                raise SignalError("segment durations must be positive")
            if s.A < 0:
                raise SignalError("limiter values must be nonnegative")
            if s.phase not in (1, 2):
                raise SignalError("phase must be 1 or 2")
        # cached arrays for vectorized evaluation of A and its antiderivative
        starts = np.array([s.start for s in segs])
        As = np.array([s.A for s in segs])
        durs = np.array([s.duration for s in segs])
        cum = np.concatenate([[0.0], np.cumsum(As * durs)])
        object.__setattr__(self, "_starts", starts)
        object.__setattr__(self, "_As", As)
        object.__setattr__(self, "_cum", cum)

    @staticmethod
    def from_durations(entries: list[tuple[float, float, int]]) -> "Signal":
        """Build from (duration, A, phase) entries; durations must sum to 1."""
        total = sum(d for d, _, _ in entries)
        if abs(total - 1.0) > 1e-9:
            raise SignalError(f"durations sum to {total}, expected 1")
        segs, t = [], 0.0
        for dur, a, ph in entries:
            segs.append(Segment(t, min(t + dur, 1.0), a, ph))
            t += dur
        # snap the final endpoint exactly to 1
        last = segs[-1]
        segs[-1] = Segment(last.start, 1.0, last.A, last.phase)
        return Signal(tuple(segs))

    # -- pointwise access -------------------------------------------------

    @property
    def breakpoints(self) -> np.ndarray:
        """Segment starts within [0, 1)."""
        return np.array([s.start for s in self.segments])

    def _segment_at(self, t: float) -> Segment:
        tau = t - np.floor(t)
        i = int(np.searchsorted(self._starts, tau + 1e-15, side="right")) - 1
        return self.segments[max(i, 0)]

    def A(self, t: float) -> float:
        return self._segment_at(t).A

    def phase(self, t: float) -> int:
        return self._segment_at(t).phase

    def indicator(self, k: int, t: float) -> float:
        return 1.0 if self.phase(t) == k else 0.0

    # -- exact integrals --------------------------------------------------

    def antiderivative(self, t):
        """B(t) = int_0^t A, with B(t + 1) = B(t) + mean(A) exactly; vectorized."""
        t = np.asarray(t, dtype=float)
        n = np.floor(t)
        tau = t - n
        i = np.maximum(np.searchsorted(self._starts, tau + 1e-15, side="right") - 1, 0)
        val = n * self._cum[-1] + self._cum[i] + self._As[i] * (tau - self._starts[i])
        return float(val) if val.ndim == 0 else val

    def integral(self, t0: float, t1: float) -> float:
        """int_{t0}^{t1} A, exact."""
        return self.antiderivative(t1) - self.antiderivative(t0)

    def mean(self) -> float:
        return float(self._cum[-1])

    def phase_integral(self, k: int) -> float:
        """int over one period of A restricted to phase k."""
        return float(sum(s.A * s.duration for s in self.segments if s.phase == k))

    def phase_length(self, k: int) -> float:
        return float(sum(s.duration for s in self.segments if s.phase == k))

    def phase_intervals(self, k: int) -> list[tuple[float, float]]:
        """Maximal sub-intervals of [0, 1) carrying phase k (contiguous
        segments of the same phase are coalesced)."""
        out: list[list[float]] = []
        for s in self.segments:
            if s.phase != k:
                continue
            if out and abs(out[-1][1] - s.start) < 1e-14:
                out[-1][1] = s.end
            else:
                out.append([s.start, s.end])
        return [(a, b) for a, b in out]

    # -- helpers ----------------------------------------------------------

    def extended_breakpoints(self, t0: float, t1: float) -> np.ndarray:
        """All breakpoints of the periodic extension within [t0, t1]."""
        base = self.breakpoints
        lo, hi = int(np.floor(t0)), int(np.floor(t1)) + 1
        pts = np.concatenate([base + k for k in range(lo, hi + 1)])
        return pts[(pts >= t0 - 1e-15) & (pts <= t1 + 1e-15)]

    def max_value(self) -> float:
        return max(s.A for s in self.segments)

    def masked(self, k: int) -> "Signal":
        """Copy with A forced to 0 outside phase k (blocked-exit limiter)."""
        segs = tuple(
            Segment(s.start, s.end, s.A if s.phase == k else 0.0, s.phase)
            for s in self.segments
        )
        return Signal(segs)

    def compressed(self, eps: float) -> "SignalView":
        """Time-compressed view t -> A(t / eps) for the oscillating model."""
        return SignalView(self, eps)

    def validate_caps(self, f0_max: float, f1_max: float, f2_max: float) -> None:
        caps = {1: min(f0_max, f1_max), 2: min(f0_max, f2_max)}
        for s in self.segments:
            if s.A > caps[s.phase] + 1e-12:
                raise SignalError(
                    f"limiter A={s.A} on phase {s.phase} exceeds the branch cap "
                    f"{caps[s.phase]} (limiter must not exceed either road's capacity)"
                )


@dataclass(frozen=True)
class SignalView:
    """A signal evaluated on a compressed clock: A_eps(t) = A(t / eps)."""

    base: Signal
    eps: float

    def A(self, t: float) -> float:
        return self.base.A(t / self.eps)

    def phase(self, t: float) -> int:
        return self.base.phase(t / self.eps)

    def breakpoints_in(self, t0: float, t1: float) -> np.ndarray:
        return self.eps * self.base.extended_breakpoints(t0 / self.eps, t1 / self.eps)
