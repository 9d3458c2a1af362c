import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tljunction.effective import build_effective_germ
from tljunction.flux import FluxFunction
from tljunction.germs import (
    FluxTriple,
    GermParams,
    PiecewiseLinear,
    check_generation,
    check_germ_property,
    constant_split_params,
    dissipation,
    entropy_flux,
    gamma_point,
    generator_set,
    germ_contains,
    germ_contains_merge,
    germ_violation,
    meso_contains_direct,
    meso_germ_params,
    reverse_triple,
    rh_residual,
    sample_germ,
    special_points,
)
from tljunction.signals import Signal


def _params(fluxes, signal):
    return build_effective_germ(signal, fluxes).params


def test_entropy_flux_sign_convention(fluxes):
    f = fluxes.f1
    assert float(entropy_flux(f, 0.3, 0.3)) == 0.0
    # q(pbar, p) = sign(p - pbar)(f(p) - f(pbar)): both orders agree
    assert float(entropy_flux(f, 0.2, 0.6)) == pytest.approx(
        float(entropy_flux(f, 0.6, 0.2)), abs=1e-15
    )
    # crossing the argmax flips the sign of the flux difference
    assert float(entropy_flux(f, 0.1, 0.4)) > 0
    assert float(entropy_flux(f, 0.5, 0.9)) < 0


@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_entropy_flux_bounded_by_lipschitz(p_bar, p):
    f = FluxFunction.quadratic(0.0, 1.0, 1.0)
    q = float(entropy_flux(f, p_bar, p))
    assert abs(q) <= f.max_speed() * abs(p - p_bar) + 1e-12


def test_piecewise_linear_validation():
    with pytest.raises(ValueError):
        PiecewiseLinear(np.array([0.0, 0.0, 1.0]), np.zeros(3))
    curve = PiecewiseLinear(np.array([0.0, 1.0]), np.array([0.0, 0.5]))
    assert float(curve(0.5)) == 0.25
    assert float(curve(2.0)) == 0.5  # clamped extension


def test_germ_params_validation():
    constant_split_params(0.5, 0.5, 2.0).validate()
    with pytest.raises(ValueError):
        GermParams(
            1.0, 0.6, 0.5,
            PiecewiseLinear(np.array([0.0, 2.0]), np.array([0.0, 0.6])),
            PiecewiseLinear(np.array([0.0, 2.0]), np.array([0.0, 0.5])),
        ).validate()


def test_generators_are_members(fluxes, alternating, stop):
    for sig in (alternating, stop):
        params = _params(fluxes, sig)
        for P in generator_set(params, fluxes, 17):
            assert germ_contains(params, fluxes, P, tol=1e-9)
            assert abs(float(rh_residual(fluxes, P))) < 1e-9


def test_violation_measures_distance(fluxes, alternating):
    params = _params(fluxes, alternating)
    g = gamma_point(params, fluxes, 0.4)
    assert germ_violation(params, fluxes, g) < 1e-12
    # breaking flux balance shows up with the right magnitude
    bad = (g[0], float(fluxes.f1.inv_plus(0.1)), g[2])
    v = germ_violation(params, fluxes, bad)
    assert v == pytest.approx(abs(0.4 - 0.1 - float(fluxes.f2(g[2]))), abs=1e-9)
    assert not germ_contains(params, fluxes, bad)


def test_special_points(fluxes, alternating):
    params = _params(fluxes, alternating)
    p1, p2, p3 = special_points(params, fluxes)
    assert p3 == (1.0, 1.0, 1.0)
    assert p1[2] == 1.0 and float(fluxes.f1(p1[1])) == pytest.approx(params.bar1)
    assert p2[1] == 1.0 and float(fluxes.f2(p2[2])) == pytest.approx(params.bar2)
    for P in (p1, p2, p3):
        assert germ_contains(params, fluxes, P, tol=1e-9)


def test_pairwise_dissipation(fluxes, stop):
    params = _params(fluxes, stop)
    rng = np.random.default_rng(3)
    pool = sample_germ(params, fluxes, 60, rng)
    worst = min(
        float(np.min(dissipation(fluxes, pa, pb))) for pa in pool for pb in pool
    )
    assert worst >= -1e-9


def test_check_germ_property_fast(fluxes, alternating):
    params = _params(fluxes, alternating)
    assert check_germ_property(params, fluxes, 2000) >= -1e-9


def test_dissipation_detects_non_members(fluxes, alternating):
    # a triple violating the demand condition dissipates negatively against
    # some generator (this is what the generation certificate exploits)
    params = _params(fluxes, alternating)
    bad = (float(fluxes.f0.inv_minus(0.2)), float(fluxes.f1.inv_plus(0.1)),
           float(fluxes.f2.inv_plus(0.1)))
    assert not germ_contains(params, fluxes, bad)
    worst = min(
        float(np.min(dissipation(fluxes, g, bad))) for g in generator_set(params, fluxes, 33)
    )
    assert worst < -1e-4


def test_generation_certificate_small(fluxes, stop):
    params = _params(fluxes, stop)
    assert check_generation(params, fluxes, 12) == []
    with pytest.raises(ValueError):
        check_generation(params, fluxes, 5)


@settings(deadline=None, max_examples=25)
@given(st.integers(0, 2**31 - 1))
def test_sampled_points_are_members(seed):
    fx = FluxTriple(
        FluxFunction.quadratic(0.0, 1.0, 2.0),
        FluxFunction.quadratic(0.0, 1.0, 1.0),
        FluxFunction.quadratic(0.0, 1.0, 1.0),
    )
    sig = Signal.from_durations([(0.2, 0.0, 1), (0.4, 1.0, 1), (0.4, 1.0, 2)])
    params = _params(fx, sig)
    rng = np.random.default_rng(seed)
    for P in sample_germ(params, fx, 8, rng):
        assert germ_contains(params, fx, P, tol=1e-8)


# -- mesoscopic germs ------------------------------------------------------


def test_meso_germ_green_phase(fluxes, stop):
    t = 0.3  # green for exit 1, A = 1
    params = meso_germ_params(stop, fluxes, t)
    assert params.bar0 == 1.0 and params.bar1 == 1.0 and params.bar2 == 0.0
    g = gamma_point(params, fluxes, 0.5)
    assert germ_contains(params, fluxes, g, tol=1e-9)
    assert meso_contains_direct(stop, fluxes, t, g, tol=1e-9)
    # nonzero flux on the idle exit is rejected
    bad = (g[0], g[1], 0.5)
    assert not meso_contains_direct(stop, fluxes, t, bad, tol=1e-6)


def test_meso_germ_red_phase(fluxes, stop):
    t = 0.1  # all red
    assert meso_contains_direct(stop, fluxes, t, (1.0, 0.0, 0.0), tol=1e-9)
    assert not meso_contains_direct(stop, fluxes, t, (0.5, 0.3, 0.0), tol=1e-6)
    params = meso_germ_params(stop, fluxes, t)
    assert check_germ_property(params, fluxes, 500) >= -1e-9


# -- reversal --------------------------------------------------------------


def test_reversal_preserves_membership(fluxes, alternating):
    params = _params(fluxes, alternating)
    rev = fluxes.reverse()
    rng = np.random.default_rng(9)
    for P in sample_germ(params, fluxes, 40, rng):
        assert germ_contains_merge(params, rev, reverse_triple(P), tol=1e-8)
    # dissipation is invariant under the transform with flipped orientation
    pool = sample_germ(params, fluxes, 12, rng)
    for pa in pool:
        for pb in pool:
            d = float(dissipation(fluxes, pa, pb))
            dr = float(dissipation(rev, reverse_triple(pa), reverse_triple(pb),
                                   signs=(-1.0, 1.0, 1.0)))
            assert dr == pytest.approx(d, abs=1e-12)
