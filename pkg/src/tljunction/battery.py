"""Regression battery: every headline property of the package as one check.

Each check returns a dict with name, passed, detail and seconds; the CLI
prints them as a table and the test suite asserts them individually.  The
reference setups are:

- "alternating": caps-saturating limiter, half period per exit
  (closed-form splits: hat1 = max(theta1 lam, lam - bar2), hat2 = min(theta2
  lam, bar2));
- "stop": a red interval then green for exit 1 then green for exit 2
  (closed-form splits: hat1 = min(lam (theta0 + theta1), bar1), hat2 =
  max(lam theta2, lam - bar1)).
"""

from __future__ import annotations

import time
from dataclasses import replace

import numpy as np

from .correctors import CorrectorField, corrector, decay_sup, queue_extent
from .effective import (
    EffectiveGerm,
    build_effective_germ,
    characteristic_subgerm,
    example_concave_hat,
    hat_lambda,
)
from .flux import FluxFunction
from .fvm import (
    BranchField,
    Scenario,
    godunov_flux,
    homogenization_error,
    kato_check,
    macro_junction_flux,
    reverse_field,
    reversed_scenario,
    simulate,
    simulate_2to1,
)
from .germs import (
    FluxTriple,
    check_generation,
    check_germ_property,
    gamma_point,
    meso_contains_direct,
    meso_germ_params,
    special_points,
)
from .signals import Signal


def default_fluxes() -> FluxTriple:
    return FluxTriple(
        FluxFunction.quadratic(0.0, 1.0, 2.0),
        FluxFunction.quadratic(0.0, 1.0, 1.0),
        FluxFunction.quadratic(0.0, 1.0, 1.0),
    )


def alternating_signal(theta1: float = 0.5) -> Signal:
    return Signal.from_durations([(theta1, 1.0, 1), (1.0 - theta1, 1.0, 2)])


def stop_signal(theta0: float = 0.2, theta1: float = 0.4) -> Signal:
    theta2 = 1.0 - theta0 - theta1
    return Signal.from_durations([(theta0, 0.0, 1), (theta1, 1.0, 1), (theta2, 1.0, 2)])


def _check(name: str, fn) -> dict:
    t0 = time.time()
    try:
        passed, detail = fn()
    except Exception as e:  # a crash is a failure, not an abort of the battery
        passed, detail = False, f"exception: {e!r}"
    return {"name": name, "passed": passed, "detail": detail, "seconds": time.time() - t0}


# -- individual criteria ---------------------------------------------------


def check_germ_property_suite(n_pairs: int = 10_000) -> tuple[bool, str]:
    fx = default_fluxes()
    rng = np.random.default_rng(7)
    worst = {}
    for label, params in (
        ("alternating", build_effective_germ(alternating_signal(), fx).params),
        ("stop", build_effective_germ(stop_signal(), fx).params),
        ("light-phase", meso_germ_params(alternating_signal(), fx, 0.25)),
    ):
        worst[label] = check_germ_property(params, fx, n_pairs, rng)
    ok = all(v >= -1e-9 for v in worst.values())
    return ok, "min dissipation " + ", ".join(f"{k}={v:.2e}" for k, v in worst.items())


def check_generation_suite(grid_res: int = 30) -> tuple[bool, str]:
    fx = default_fluxes()
    params = build_effective_germ(alternating_signal(), fx).params
    bad = check_generation(params, fx, grid_res)
    return len(bad) == 0, f"{len(bad)} counterexamples on a {grid_res}^3 grid"


def check_closed_forms(n_lam: int = 1000) -> tuple[bool, str]:
    fx = default_fluxes()
    th1 = 0.3
    sig_a = alternating_signal(th1)
    bar2 = 1.0 - th1
    lams = np.linspace(0.0, 1.0, n_lam)
    eff_a = build_effective_germ(sig_a, fx)
    err_a = max(
        float(np.max(np.abs(eff_a.params.hat1(lams) - np.maximum(th1 * lams, lams - bar2)))),
        float(np.max(np.abs(eff_a.params.hat2(lams) - np.minimum((1 - th1) * lams, bar2)))),
    )
    th0, th1b, th2 = 0.2, 0.4, 0.4
    sig_s = stop_signal(th0, th1b)
    bar0s, bar1s = 0.8, 0.4
    lams_s = np.linspace(0.0, bar0s, n_lam)
    eff_s = build_effective_germ(sig_s, fx)
    err_s = max(
        float(np.max(np.abs(eff_s.params.hat1(lams_s) - np.minimum(lams_s * (th0 + th1b), bar1s)))),
        float(np.max(np.abs(eff_s.params.hat2(lams_s) - np.maximum(lams_s * th2, lams_s - bar1s)))),
    )
    sum_err = max(
        float(np.max(np.abs(eff.params.hat1(g) + eff.params.hat2(g) - np.minimum(g, eff.bar0))))
        for eff, g in ((eff_a, lams), (eff_s, lams_s))
    )

    # continuous tent limiter: linear split then quadratic-concave
    def tent(t):
        t = t - np.floor(t)
        if t <= 0.25:
            return 0.5 - t
        if t <= 0.75:
            return t
        return 1.5 - t

    def tent_closed(lam):
        if lam <= 0.25:
            return 0.25 * lam
        return 0.0625 + 0.5 * (lam - 0.25) - (lam**2 - 0.0625) / 2

    lams3, hats3, _ = example_concave_hat(tent, 0.25, 512)
    err_c = float(np.max(np.abs(hats3 - [tent_closed(min(l, 0.5)) for l in lams3])))
    slopes = np.diff(hats3) / np.diff(lams3)
    ok = (
        err_a <= 1e-8
        and err_s <= 1e-8
        and sum_err <= 1e-12
        and err_c <= 1e-3
        and np.all(slopes < 1.0)
        and abs(slopes[0] - 0.25) <= 1e-3  # low-flux slope = green fraction
    )
    return ok, (
        f"sup errors: alternating={err_a:.1e}, stop={err_s:.1e}, "
        f"split-sum={sum_err:.1e}, tent@512={err_c:.1e}, "
        f"slopes first={slopes[0]:.4f} max={slopes.max():.3f}"
    )


def check_order_effect() -> tuple[bool, str]:
    # equal green times: the exit served first still receives more flux
    sig = stop_signal(0.2, 0.4)
    bar0 = sig.mean()
    mid = bar0 / 2
    gap = hat_lambda(sig, 1, mid) - hat_lambda(sig, 2, mid)
    return gap > 0.01 * bar0, f"hat1-hat2 at bar0/2 is {gap:.4f} (threshold {0.01 * bar0:.4f})"


def _representative_correctors(fx: FluxTriple, eff: EffectiveGerm) -> list[CorrectorField]:
    bar0 = eff.bar0
    fields = []
    for lam in (0.1 * bar0, 0.35 * bar0, 0.6 * bar0, 0.85 * bar0, bar0):
        fields.append(corrector(gamma_point(eff.params, fx, lam), eff, fx))
    for p in special_points(eff.params, fx):
        fields.append(corrector(p, eff, fx))
    return fields


def check_correctors(n_times: int = 1000) -> tuple[bool, str]:
    fx = default_fluxes()
    sig = stop_signal()
    eff = build_effective_germ(sig, fx)
    fields = _representative_correctors(fx, eff)
    ts = (np.arange(n_times) + 0.5) / n_times
    worst_rate = 1.0
    for fld in fields:
        sig_for_trace = sig if fld.case in ("i", "iv") else sig.masked(1 if fld.case == "ii" else 2)
        ok = sum(
            meso_contains_direct(sig_for_trace, fx, t, fld.trace_triple(t), 1e-3) for t in ts
        )
        worst_rate = min(worst_rate, ok / n_times)
    # decay on a nontrivial fluid corrector
    fld = fields[2]
    cs = {M: decay_sup(fld, M, n_t=10, n_x=6) * M for M in (10, 20, 40)}
    stable = max(cs.values()) <= 2.0 * max(min(cs.values()), 1e-12)
    # compact queue support of the incoming fluid profile
    ext = queue_extent(fld, x_max=4.0, n=200)
    beyond = max(
        abs(fld.u0(t, -(ext + 0.5 + s)) - fld.far[0])
        for t in np.linspace(0, 1, 9)
        for s in (0.0, 1.0, 3.0)
    )
    ok_all = worst_rate >= 0.99 and stable and beyond < 1e-12
    return ok_all, (
        f"worst trace pass rate {worst_rate:.3f}, decay C(M)="
        + ", ".join(f"{M}:{c:.3f}" for M, c in cs.items())
        + f", queue extent {ext:.2f}, residue beyond {beyond:.1e}"
    )


def check_near_fixed_point(dx: float = 1 / 200, L: float = 1.5) -> tuple[bool, str]:
    fx = default_fluxes()
    sig = stop_signal()
    eff = build_effective_germ(sig, fx)
    fld = corrector(gamma_point(eff.params, fx, 0.5 * eff.bar0), eff, fx)
    init = (
        lambda x: fld.u0(0.0, min(x, -1e-9)),
        lambda x: fld.u1(0.0, max(x, 1e-9)),
        lambda x: fld.u2(0.0, max(x, 1e-9)),
    )
    sc = Scenario(fx, sig, "meso", 1.0, T=1.0, L=L, dx=dx, init=init)
    start = BranchField.from_profiles(fx, L, dx, *init)
    traj = simulate(sc, record_trace=False)
    dist = traj.final.l1_distance(start)
    bound = 3.0 * dx * (3 * L)
    return dist <= bound, f"one-period L1 drift {dist:.4f} vs bound {bound:.4f}"


def check_kato(n_pairs: int = 5) -> tuple[bool, str]:
    fx = default_fluxes()
    sig = stop_signal()
    rng = np.random.default_rng(11)
    worst = -np.inf

    def rand_init():
        # random data near the node; both members of a pair share the far
        # constants, so the copy boundaries never see a difference and the
        # whole distance decay is due to the interior scheme and the node rule
        def mk(far):
            vals = rng.random(2) * 0.9
            return lambda x: float(vals[0] if abs(x) < 0.15 else vals[1] if abs(x) < 0.3 else far)
        return (mk(0.4), mk(0.2), mk(0.2))

    # differences spread at most at speed max|f'| = 8; with T = 0.5 they stay
    # inside |x| < 0.3 + 4 < L
    for model in ("meso", "macro"):
        for _ in range(n_pairs):
            sc = Scenario(fx, sig, model, 0.5, T=0.5, L=4.5, dx=1 / 60, init=rand_init())
            series = kato_check(sc, rand_init(), rand_init())
            ds = [d for _, d in series]
            worst = max(worst, max(b - a for a, b in zip(ds, ds[1:])))
    return worst <= 1e-10, f"largest per-step L1 increase {worst:.2e}"


def _riemann_scenario(fx, sig, model: str, dx: float, eps: float = 1.0) -> Scenario:
    return Scenario(
        fx, sig, model, eps, T=2.0, L=4.0, dx=dx,
        init=(lambda x: 0.85, lambda x: 0.0, lambda x: 0.0),
        name="riemann-congested-in",
    )


def check_homogenization(dx: float = 1 / 400) -> tuple[bool, str]:
    fx = default_fluxes()
    sig = alternating_signal()
    sc = _riemann_scenario(fx, sig, "meso", dx)
    eps_list = [1 / 4, 1 / 8, 1 / 16, 1 / 32]
    errs = dict(homogenization_error(sc, eps_list))
    init_norm = 0.85 * 4.0
    ok = errs[1 / 32] < 0.5 * errs[1 / 4] and errs[1 / 32] < 0.05 * init_norm

    # merge-junction mirror: solving the reversed problem must reproduce the
    # diverge run exactly through the reversal transform
    direct = simulate(replace(sc, eps=1 / 4), record_trace=False).final
    merge_sc = replace(
        sc,
        fluxes=fx.reverse(),
        eps=1 / 4,
        merge=True,
        init=tuple(lambda x, i=i: -i(-x) for i in sc.init),
    )
    merged = simulate_2to1(merge_sc)
    back = reverse_field(merged.final, fx)
    rev_err = max(
        float(np.max(np.abs(back.rho(j) - direct.rho(j)))) for j in range(3)
    )
    ok = ok and rev_err <= 1e-14
    detail = ", ".join(f"eps=1/{int(1/e)}: {errs[e]:.4f}" for e in eps_list)
    return ok, detail + f"; init norm {init_norm}, reversal mismatch {rev_err:.1e}"


def check_macro_rule_cases() -> tuple[bool, str]:
    fx = default_fluxes()
    eff = build_effective_germ(alternating_signal(), fx)
    params = eff.params
    c = (fx.f0.c, fx.f1.c, fx.f2.c)
    lam = 0.6
    cases = {
        "fluid-split": ((float(fx.f0.inv_plus(lam)), 0.0, 0.0),
                        (lam, float(params.hat1(lam)), float(params.hat2(lam)))),
        "exit2-blocked": ((c[0], 0.0, c[2]), (params.bar1, params.bar1, 0.0)),
        "exit1-blocked": ((c[0], c[1], 0.0), (params.bar2, 0.0, params.bar2)),
        "jam": (((c[0], c[1], c[2])), (0.0, 0.0, 0.0)),
    }
    worst = 0.0
    for name, (states, expected) in cases.items():
        phi = macro_junction_flux(params, fx, *states)
        worst = max(worst, max(abs(a - b) for a, b in zip(phi, expected)))
    return worst <= 1e-12, f"max flux-vector deviation over the four cases {worst:.1e}"


def check_bv_bound() -> tuple[bool, str]:
    # centered rarefaction on a single road: variation in a window of radius
    # R/3 grows linearly in R, so V/R is a stable constant
    f = FluxFunction.quadratic(0.0, 1.0, 1.0)
    consts = {}
    for dx in (1 / 100, 1 / 200):
        n = int(round(4.0 / dx))
        x = -2.0 + (np.arange(n) + 0.5) * dx
        u = np.where(x < 0, 0.9, 0.1)
        t, dt = 0.0, 0.9 * dx / f.max_speed()
        while t < 0.5 - 1e-12:
            h = min(dt, 0.5 - t)
            fl = godunov_flux(f, u[:-1], u[1:])
            fl = np.concatenate([[float(f(u[0]))], fl, [float(f(u[-1]))]])
            u = u - h / dx * np.diff(fl)
            t += h
        for R in (0.25, 0.5, 1.0):
            sel = np.abs(x) <= R / 3
            consts[(dx, R)] = float(np.abs(np.diff(u[sel])).sum()) / R
    vals = list(consts.values())
    ratio = max(vals) / min(vals)
    return ratio <= 2.0, (
        f"V/R in [{min(vals):.4f}, {max(vals):.4f}], spread factor {ratio:.2f}"
    )


ALL_CHECKS = [
    ("germ-property", check_germ_property_suite),
    ("generation", check_generation_suite),
    ("effective-closed-forms", check_closed_forms),
    ("order-effect", check_order_effect),
    ("correctors", check_correctors),
    ("corrector-fixed-point", check_near_fixed_point),
    ("kato-contraction", check_kato),
    ("homogenization", check_homogenization),
    ("macro-rule-cases", check_macro_rule_cases),
    ("bv-bound", check_bv_bound),
]


def run_battery(name_filter: str = "") -> list[dict]:
    results = []
    for name, fn in ALL_CHECKS:
        if name_filter and name_filter not in name:
            continue
        results.append(_check(name, fn))
    return results
