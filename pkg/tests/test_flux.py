import numpy as np
import pytest
from hypothesis import given, strategies as st

from tljunction.flux import (
    FluxDomainError,
    FluxFunction,
    RestrictedFlux,
    fundamental_xi,
)


def test_quadratic_basics():
    f = FluxFunction.quadratic(0.0, 1.0, 2.0)
    assert f(0.0) == 0.0 and f(1.0) == 0.0
    assert f(0.5) == pytest.approx(2.0)
    assert f.b == 0.5
    assert f.max_speed() == pytest.approx(8.0)


def test_domain_enforced():
    f = FluxFunction.quadratic(0.0, 1.0, 1.0)
    with pytest.raises(FluxDomainError):
        f(1.5)
    with pytest.raises(FluxDomainError):
        f.inv_plus(2.0)
    with pytest.raises(FluxDomainError):
        FluxFunction.quadratic(1.0, 0.0, 1.0)


@given(st.floats(0.01, 0.99))
def test_branch_inverses_roundtrip(p):
    f = FluxFunction.quadratic(0.0, 1.0, 1.5)
    lam = float(f(p))
    if p <= f.b:
        assert float(f.inv_plus(lam)) == pytest.approx(p, abs=1e-10)
    if p >= f.b:
        assert float(f.inv_minus(lam)) == pytest.approx(p, abs=1e-10)


@given(st.floats(-0.9, 0.9), st.floats(0.05, 2.0))
def test_deriv_inv_inverts(m_frac, f_max):
    f = FluxFunction.quadratic(0.0, 1.0, f_max)
    m = m_frac * f.max_speed()
    p = float(f.deriv_inv(m))
    assert float(f.deriv(p)) == pytest.approx(m, abs=1e-9)


def test_envelopes():
    f = FluxFunction.quadratic(0.0, 1.0, 1.0)
    # demand is monotone up, supply monotone down, both hit f_max at b
    ps = np.linspace(0.0, 1.0, 101)
    dem = f.envelope_plus(ps)
    sup = f.envelope_minus(ps)
    assert np.all(np.diff(dem) >= -1e-14)
    assert np.all(np.diff(sup) <= 1e-14)
    assert dem[-1] == pytest.approx(1.0)
    assert sup[0] == pytest.approx(1.0)
    assert float(f.envelope_plus(0.2)) == pytest.approx(float(f(0.2)))
    assert float(f.envelope_minus(0.2)) == pytest.approx(1.0)


def test_reverse_is_involution():
    f = FluxFunction.quadratic(0.2, 1.3, 0.7)
    g = f.reverse().reverse()
    assert (g.a, g.c, g.f_max) == (f.a, f.c, f.f_max)
    r = f.reverse()
    for p in np.linspace(f.a, f.c, 17):
        assert float(r(-p)) == pytest.approx(float(f(p)), abs=1e-14)


def test_from_samples_matches_quadratic():
    f = FluxFunction.quadratic(0.0, 1.0, 1.0)
    ps = np.linspace(0.0, 1.0, 41)
    g = FluxFunction.from_samples([(p, float(f(p))) for p in ps])
    assert g.b == pytest.approx(0.5, abs=1e-6)
    assert g.f_max == pytest.approx(1.0, abs=1e-6)
    for p in np.linspace(0.05, 0.95, 19):
        assert float(g(p)) == pytest.approx(float(f(p)), abs=1e-4)
        assert float(g.inv_plus(float(g(min(p, 0.45))))) == pytest.approx(
            min(p, 0.45), abs=1e-3
        )


def test_from_samples_rejects_nonconcave():
    ps = np.linspace(0.0, 1.0, 21)
    wiggle = np.sin(6 * np.pi * ps) * 0.3 + 0.01
    wiggle[0] = wiggle[-1] = 0.0
    with pytest.raises(FluxDomainError):
        FluxFunction.from_samples(list(zip(ps, wiggle)))


def test_restricted_flux_mirror():
    base = FluxFunction.quadratic(0.0, 1.0, 2.0)
    p0 = 0.2
    # incoming-road transform: g(p) = f0(p0 - p) - f0(p0), increasing on
    # [p0 - c, p0 - b]
    g = RestrictedFlux(base, p0 - 1.0, p0 - 0.5, shift=p0, offset=float(base(p0)), orient=-1)
    lo_val, hi_val = g.value_range()
    assert lo_val == pytest.approx(-float(base(p0)))
    assert hi_val == pytest.approx(2.0 - float(base(p0)))
    for v in np.linspace(lo_val, hi_val, 23):
        p = float(g.inverse(v))
        assert float(g(p)) == pytest.approx(v, abs=1e-10)
    # derivative inverse agrees with finite differences
    for m in np.linspace(0.5, 7.0, 9):
        p = float(g.deriv_inv(m))
        assert float(g.deriv(p)) == pytest.approx(m, abs=1e-9)


def test_fundamental_xi_matches_bruteforce():
    base = FluxFunction.quadratic(0.0, 1.0, 1.0)
    g = RestrictedFlux(base, 0.0, 0.5)
    ps = np.linspace(0.0, 0.5, 4001)
    vals = np.asarray(g(ps))
    for s, y in [(1.0, 0.3), (0.5, 0.0), (2.0, 3.0), (0.25, 0.1)]:
        brute = float(np.max(-ps * y + s * vals))
        val, p_hat = fundamental_xi(g, s, y)
        assert val == pytest.approx(brute, abs=1e-6)
        assert 0.0 <= p_hat <= 0.5
    # s = 0 degenerates to a linear program on the interval
    val, p_hat = fundamental_xi(g, 0.0, 1.0)
    assert val == 0.0 and p_hat == 0.0
    with pytest.raises(FluxDomainError):
        fundamental_xi(g, -1.0, 0.0)
