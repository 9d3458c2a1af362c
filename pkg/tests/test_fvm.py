import numpy as np
import pytest
from dataclasses import replace

from tljunction.effective import build_effective_germ
from tljunction.fvm import (
    BranchField,
    GermTraceError,
    Scenario,
    bv_estimate,
    godunov_flux,
    kato_check,
    macro_junction_flux,
    meso_junction_flux,
    reverse_field,
    reversed_scenario,
    simulate,
    simulate_2to1,
    step,
)
from tljunction.germs import gamma_point


def _scenario(fluxes, signal, **kw):
    base = dict(
        fluxes=fluxes, signal=signal, model="meso", eps=0.5, T=0.5, L=1.5,
        dx=1 / 50, init=(lambda x: 0.4, lambda x: 0.2, lambda x: 0.2),
    )
    base.update(kw)
    return Scenario(**base)


def test_godunov_riemann_cases(fluxes):
    f = fluxes.f1
    # fluid-fluid takes the upwind value, shock/rarefaction split at b
    assert float(godunov_flux(f, 0.2, 0.3)) == pytest.approx(float(f(0.2)))
    assert float(godunov_flux(f, 0.8, 0.7)) == pytest.approx(float(f(0.7)))
    assert float(godunov_flux(f, 0.8, 0.2)) == pytest.approx(1.0)  # sonic point
    assert float(godunov_flux(f, 0.2, 0.8)) == pytest.approx(
        min(float(f(0.2)), float(f(0.8)))
    )


def test_meso_junction_flux(fluxes, stop):
    clock = stop.compressed(1.0)
    # green exit 1, ample supply: limiter binds
    phi = meso_junction_flux(clock, fluxes, 0.3, 0.5, 0.1, 0.9)
    assert phi == (1.0, 1.0, 0.0)
    # red: nothing moves
    assert meso_junction_flux(clock, fluxes, 0.1, 0.5, 0.1, 0.1) == (0.0, 0.0, 0.0)
    # green exit 2, supply-limited
    phi = meso_junction_flux(clock, fluxes, 0.7, 0.5, 0.1, 0.9)
    assert phi[0] == pytest.approx(float(fluxes.f2.envelope_minus(0.9)))
    assert phi[1] == 0.0 and phi[2] == phi[0]


def test_conservation_and_boundaries(fluxes, stop):
    field = BranchField.from_profiles(
        fluxes, 1.0, 1 / 40, lambda x: 0.4, lambda x: 0.2, lambda x: 0.3
    )
    entry = step(field, (0.5, 0.3, 0.2), 0.005)
    assert abs(entry["residual"]) < 1e-14
    assert entry["t"] == pytest.approx(0.005)


def test_macro_rule_matches_splits(fluxes, alternating):
    params = build_effective_germ(alternating, fluxes).params
    lam = 0.7
    r0 = float(fluxes.f0.inv_plus(lam))
    phi = macro_junction_flux(params, fluxes, r0, 0.0, 0.0)
    assert phi[0] == pytest.approx(lam, abs=1e-12)
    assert phi[1] == pytest.approx(float(params.hat1(lam)), abs=1e-12)
    assert phi[2] == pytest.approx(float(params.hat2(lam)), abs=1e-12)


def test_macro_rule_binding_exit(fluxes, alternating):
    params = build_effective_germ(alternating, fluxes).params
    # exit 2 jammed: its ceiling is zero, exit 1 takes what it can
    phi = macro_junction_flux(params, fluxes, 1.0, 0.0, 1.0)
    assert phi == (pytest.approx(0.5), pytest.approx(0.5), pytest.approx(0.0))
    # full jam
    assert macro_junction_flux(params, fluxes, 1.0, 1.0, 1.0) == (
        pytest.approx(0.0), pytest.approx(0.0), pytest.approx(0.0)
    )


def test_macro_rule_stationary_on_germ(fluxes, alternating):
    params = build_effective_germ(alternating, fluxes).params
    g = gamma_point(params, fluxes, 0.45)
    phi = macro_junction_flux(params, fluxes, *g)
    assert phi[0] == pytest.approx(float(fluxes.f0(g[0])), abs=1e-11)
    assert phi[1] == pytest.approx(float(fluxes.f1(g[1])), abs=1e-11)


def test_macro_audit_wiring(fluxes, alternating, monkeypatch):
    import tljunction.fvm as fvm

    params = build_effective_germ(alternating, fluxes).params
    macro_junction_flux(params, fluxes, 0.1, 0.0, 0.0, audit=True)  # clean
    monkeypatch.setattr(fvm, "germ_contains", lambda *a, **k: False)
    with pytest.raises(GermTraceError):
        fvm.macro_junction_flux(params, fluxes, 0.1, 0.0, 0.0, audit=True)


def test_mutated_meso_rule_is_falsified(fluxes, stop, monkeypatch):
    # min -> max in the node rule overdraws the roads; densities leave the
    # admissible box within a few steps and the run aborts
    import tljunction.fvm as fvm
    from tljunction.flux import FluxDomainError

    def flipped(clock, fx, t, r0, r1, r2):
        a = clock.A(t)
        k = clock.phase(t)
        d0 = float(fx.f0.envelope_plus(r0))
        if k == 1:
            phi = max(a, d0, float(fx.f1.envelope_minus(r1)))
            return phi, phi, 0.0
        phi = max(a, d0, float(fx.f2.envelope_minus(r2)))
        return phi, 0.0, phi

    monkeypatch.setattr(fvm, "meso_junction_flux", flipped)
    sc = _scenario(fluxes, stop, T=0.4)
    with pytest.raises(FluxDomainError):
        simulate(sc)


def test_simulate_records_trace_and_mass(fluxes, stop):
    sc = _scenario(fluxes, stop, T=0.4, snapshot_times=(0.2,))
    traj = simulate(sc)
    assert traj.max_residual < 1e-13
    assert 0.2 in traj.snapshots and sc.T in traj.snapshots
    ts = [row[0] for row in traj.trace]
    assert ts == sorted(ts)
    # ledger mass evolves consistently with boundary fluxes (residual column)
    assert max(abs(r[3]) for r in traj.ledger) < 1e-13


def test_macro_model_runs_clean(fluxes, alternating):
    sc = _scenario(fluxes, alternating, model="macro", T=0.3)
    traj = simulate(sc)  # audit active on every step: no GermTraceError
    assert traj.max_residual < 1e-13


def test_step_clipping_hits_switches(fluxes, stop):
    sc = _scenario(fluxes, stop, eps=0.25, T=0.3)
    traj = simulate(sc)
    ts = np.array([row[0] for row in traj.trace])
    for s in (0.05, 0.15, 0.25):  # eps-scaled switch instants
        assert np.min(np.abs(ts - s)) < 1e-12


def test_kato_lockstep_contracts(fluxes, stop):
    sc = _scenario(fluxes, stop, L=3.0, T=0.25)
    mk = lambda v: (lambda x: v if abs(x) < 0.2 else (0.4 if x < 0 else 0.2))
    series = kato_check(sc, (mk(0.9), mk(0.1), mk(0.3)), (mk(0.2), mk(0.6), mk(0.1)))
    ds = [d for _, d in series]
    # monotone scheme: the pair distance never grows (strict decay only when
    # the two solutions actually interact)
    assert all(b <= a + 1e-12 for a, b in zip(ds, ds[1:]))


def test_bv_estimate_windows(fluxes):
    field = BranchField.from_profiles(
        fluxes, 2.0, 1 / 50, lambda x: 0.4 + 0.1 * np.sin(x), lambda x: 0.2, lambda x: 0.2
    )
    v = bv_estimate(field, 0, -1.0, 0.9)
    assert v > 0
    with pytest.raises(ValueError):
        bv_estimate(field, 0, -1.0, 1.5)  # window leaves the branch
    with pytest.raises(ValueError):
        bv_estimate(field, 1, 0.3, 0.5)  # window touches the node


def test_reversal_is_exact(fluxes, alternating):
    sc = _scenario(fluxes, alternating, T=0.4, L=2.0,
                   init=(lambda x: 0.7, lambda x: 0.1, lambda x: 0.2))
    direct = simulate(sc, record_trace=False).final
    merge_sc = replace(
        sc,
        fluxes=fluxes.reverse(),
        merge=True,
        init=tuple(lambda x, i=i: -i(-x) for i in sc.init),
    )
    merged = simulate_2to1(merge_sc)
    back = reverse_field(merged.final, fluxes)
    for j in range(3):
        assert np.array_equal(back.rho(j), direct.rho(j))


def test_reversed_scenario_requires_merge(fluxes, alternating):
    sc = _scenario(fluxes, alternating)
    with pytest.raises(ValueError):
        reversed_scenario(sc)
    with pytest.raises(ValueError):
        simulate(replace(sc, merge=True))
