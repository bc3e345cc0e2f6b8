"""Acceptance criteria, one test per criterion.

Each test prints a single ``criterion N [...]: PASS/FAIL`` line; the lines
are repeated in the pytest terminal summary.
"""

from __future__ import annotations

import filecmp
import itertools
import time
from pathlib import Path

import numpy as np
import pytest

from levyito import fx
from levyito.cli import bundled_scenarios, main
from levyito.itocalc import exponential_formula_rhs
from levyito.levy import LevyModel
from levyito.mc import McConfig, collect, estimate
from levyito.paths import sample_brownian
from levyito.presets import (exponential_formula_cases, exponential_formula_mc, merton_asset_preset,
                             merton_risk_preset, vasicek_jump_preset, vg_risk_preset)
from levyito.pricing_kernel import (asset_log_values, drift_correction, drift_regression, excess_rate_of_return,
                                    kernel_log_values)
from levyito.rates import chaos
from levyito.rates import vasicek as vas
from levyito.rates.curve import YieldCurve

N = 100_000
SCENARIOS = Path(__file__).resolve().parents[1] / "src" / "levyito" / "scenarios"


def test_criterion_1_exponential_formula(report):
    t0 = time.perf_counter()
    bad = []
    for k, case in enumerate(exponential_formula_cases()):
        rhs = exponential_formula_rhs(case.f, case.model, case.t0, case.t1, case.time_breaks, case.tilt)
        assert rhs == pytest.approx(case.closed_form, rel=1e-10)
        e = exponential_formula_mc(case, McConfig(101 + k, N))
        if not e.within(rhs):
            bad.append(f"{case.name} z={e.zscore(rhs):.2f}")
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 60
    report(1, "exponential formula", ok, f"5 cases, {elapsed:.1f}s" + (f"; failed {bad}" if bad else ""))
    assert not bad
    assert elapsed < 60


def test_criterion_2_kernel_martingale(report):
    times = [0.5, 1.0, 2.0]
    grid = [0.0, 0.5, 1.0, 2.0]
    bad, zs = [], []
    for k, (name, (model, risk)) in enumerate([("merton", merton_risk_preset()), ("vg", vg_risk_preset())]):

        def fn(rng, paths, model=model, risk=risk):
            b = model.sample_batch(2.0, rng, paths, grid)
            br = sample_brownian(grid, 1, rng, paths) if risk.kappa is not None else None
            return np.exp(kernel_log_values(risk, None, model, b, times, br))

        vals = collect(McConfig(201 + k, N), fn)
        for c, t in enumerate(times):
            e = estimate(vals[:, c])
            zs.append(e.zscore(1.0))
            if not e.within(1.0):
                bad.append(f"{name}@{t} z={e.zscore(1.0):.2f}")
    report(2, "pricing-kernel martingale", not bad, f"max |z| {max(map(abs, zs)):.2f}")
    assert not bad


def test_criterion_3_asset_consistency(report):
    model, risk, expo = merton_asset_preset()
    r = 0.02
    times = np.array([0.25, 0.5, 0.75, 1.0])

    def fn(rng, paths):
        b = model.sample_batch(1.0, rng, paths)
        lk = kernel_log_values(risk, r, model, b, times)
        la = asset_log_values(risk, expo, r, model, b, times, 1.0)
        return np.concatenate([np.exp(lk + la), la - r * times[None, :]], axis=1)

    vals = collect(McConfig(301, N), fn)
    deflated = [estimate(vals[:, c]) for c in range(times.size)]
    ok_defl = all(e.within(1.0) for e in deflated)
    target = excess_rate_of_return(risk, expo, model, 0.0)
    reg = drift_regression(vals[:, times.size:], times, drift_correction(expo, model))
    ok_reg = reg.within(target)
    report(3, "asset consistency", ok_defl and ok_reg,
           f"deflated z {[round(e.zscore(1.0), 2) for e in deflated]}; R={target:.6f} regression z={reg.zscore(target):.2f}")
    assert ok_defl
    assert ok_reg


def test_criterion_4_vasicek(report):
    t0 = time.perf_counter()
    bad = []
    for k, (lam, T) in enumerate(itertools.product([0.0, 0.1, 0.3], [1.0, 5.0, 10.0])):
        spec = vasicek_jump_preset(lam)
        cf = float(vas.bond_price_closed_form(spec, spec.r0, 0.0, T))
        e = vas.bond_price_mc(spec, 0.0, T, McConfig(401 + k, N))
        if not e.within(cf):
            bad.append(f"lam={lam},T={T} z={e.zscore(cf):.2f}")
    classical = vas.classical_vasicek(0.5, 0.04, 0.03)
    diff = 0.0
    for t, T in [(0.0, 0.5), (0.0, 1.0), (0.0, 10.0), (1.0, 3.0), (2.5, 30.0)]:
        for r_t in (-0.01, 0.03, 0.08):
            a = float(vas.bond_price_closed_form(classical, r_t, t, T))
            diff = max(diff, abs(a - float(vas.classical_vasicek_bond(0.5, 0.04, r_t, T - t))))
    spec = vasicek_jump_preset(0.1, vol=0.02)
    times = [1.0, 5.0]

    def fn(rng, paths):
        b = spec.model.sample_batch(5.0, rng, paths)
        return vas.short_rate_values(spec, b, times)

    rv = collect(McConfig(499, N), fn)
    moments_ok = True
    for c, t in enumerate(times):
        mean = float(vas.short_rate_mean(spec, t))
        var = vas.short_rate_variance(spec, t)
        em = estimate(rv[:, c])
        ev = estimate((rv[:, c] - mean) ** 2)
        moments_ok &= em.within(mean) and ev.within(var)
    elapsed = time.perf_counter() - t0
    ok = not bad and diff <= 1e-12 and moments_ok and elapsed < 300
    report(4, "Levy-Ito Vasicek", ok,
           f"3x3 grid failures {bad}; classical diff {diff:.1e}; moments {moments_ok}; {elapsed:.1f}s")
    assert not bad
    assert diff <= 1e-12
    assert moments_ok
    assert elapsed < 300


def test_criterion_5_chaos(report):
    model = LevyModel.symmetric_bernoulli(1.0)
    flat = YieldCurve.flat(0.03)
    market = YieldCurve.from_csv(SCENARIOS / "curve_10y.csv")
    assert market.tenors.size == 10
    res = {}
    specs = {}
    for name, curve in [("flat", flat), ("market", market)]:
        specs[name] = chaos.calibrate_to_curve(curve, model)
        tenors = curve.tenors if name == "market" else [0.25, 0.5, 1, 2, 5, 10, 20, 30]
        res[name] = chaos.calibration_residual(specs[name], curve, tenors)
    ok_cal = all(v <= 1e-8 for v in res.values())

    spec = specs["market"]
    abc = chaos.compute_abc(spec)
    b0 = model.sample_batch(1.0, 1, np.arange(4))
    st0 = chaos.simulate_chaos_state(spec, b0, [0.0, 1.0])
    ratio_err = max(float(np.max(np.abs(chaos.bond_price_chaos(abc, st0, 0.0, T) - market.discount(T))))
                    for T in (0.5, 1.0, 3.0, 10.0, 25.0))
    ok_ratio = ratio_err <= 1e-8

    norm = abc.normalized()
    mats = [2.0, 5.0, 10.0]

    def fn(rng, paths):
        b = model.sample_batch(1.0, rng, paths)
        s = chaos.simulate_chaos_state(spec, b, [0.0, 1.0])
        M, Q = s.at(1.0)
        return np.stack([chaos.conditional_kernel(norm, M, Q, T, 1.0) for T in mats], axis=-1)

    vals = collect(McConfig(501, N), fn)
    mart = [bool(estimate(vals[:, c]).within(float(norm.A(T)[0]))) for c, T in enumerate(mats)]
    ok_mart = all(mart)

    b = model.sample_batch(1.0, 502, np.arange(40))
    st = chaos.simulate_chaos_state(spec, b, [0.0, 1.0])
    k_factor = chaos.pricing_kernel_chaos(abc, st, 1.0)
    k_general = chaos.pricing_kernel_second_order(spec.phi_fn, chaos.factorizable_phi2(spec), model, b, 1.0,
                                             spec.horizon_cap, spec.time_breaks, spec.tilt)
    eq_err = float(np.max(np.abs(k_factor - k_general)))
    ok_eq = eq_err <= 1e-8

    frn = [chaos.frn_identity_check(specs["flat"], t, McConfig(503 + i, 20_000, batch_size=5000))
           for i, t in enumerate([0.0, 1.0])]
    ok_frn = all(e.within(1.0) for e in frn)
    ok = ok_cal and ok_ratio and ok_mart and ok_eq and ok_frn
    report(5, "chaos model", ok,
           f"calibration {res['flat']:.1e}/{res['market']:.1e}; ratio {ratio_err:.1e}; martingale {mart}; "
           f"eq kernels {eq_err:.1e}; FRN z {[round(e.zscore(1.0), 2) for e in frn]}")
    assert ok_cal and ok_ratio and ok_mart and ok_eq and ok_frn


def _reference_constructions():
    return {
        "gbm": fx.gbm_system(fx.unit_vectors([0, 120, 240]), rates=[0.01, 0.02, 0.03]),
        "iid": fx.iid_system(LevyModel.variance_gamma(2.0), [0.6, 0.6, 0.6], rates=[0.0, 0.01, 0.02]),
        "merton": fx.merton_system(fx.unit_vectors([0, 120, 240], 0.8), 1.0, mean=[0.0, 0.0],
                                   cov=np.eye(2)),
        "vg": fx.vg_system(fx.unit_vectors([0, 25, 50], 1.8), 2.0),
    }


def test_criterion_6_fx(report):
    systems = _reference_constructions()
    grid = np.linspace(0.0, 1.0, 5)
    ident = 0.0
    for k, s in enumerate(systems.values()):
        noise = fx.sample_fx_noise(s, 1.0, 601 + k, np.arange(5000), grid)
        rep = fx.fx_identity_check(s, noise, grid)
        ident = max(ident, rep.reciprocal, rep.triangle)
    ok_ident = ident <= 1e-12

    quad = 0.0
    for name in ("iid", "merton", "vg"):
        s = systems[name]
        for i, j in itertools.permutations(range(s.N), 2):
            quad = max(quad, abs(fx.fx_excess_rate(s, i, j) - fx.excess_rate_closed_form(s, i, j)))
    ok_quad = quad <= 1e-8

    ref = {name: fx.siegel_check(s) for name, s in systems.items()}
    ok_reference = all(r.numeric and r.analytic for r in ref.values())
    gbm_R = ref["gbm"].R[0][~np.eye(3, dtype=bool)]
    assert np.allclose(gbm_R, 1.5, atol=1e-12)

    searches = {f: fx.siegel_search(f, 1000, seed=7) for f in ("gbm", "iid", "merton", "vg")}
    violations = {f: r.violations for f, r in searches.items()}
    ok_search = all(v == 0 for v in violations.values()) and all(r.configs == 1000 for r in searches.values())

    drift = []
    for k, (name, s) in enumerate(systems.items()):
        for p, (i, j) in enumerate([(0, 1), (2, 0)]):
            e = fx.fx_drift_regression(s, (i, j), McConfig(650 + 2 * k + p, N), horizon=1.0, steps=4)
            target = s.constant_rate(j) - s.constant_rate(i) + fx.excess_rate_closed_form(s, i, j)
            drift.append((name, (i, j), e.zscore(target), e.within(target)))
    ok_drift = all(d[3] for d in drift)
    ok = ok_ident and ok_quad and ok_reference and ok_search and ok_drift
    report(6, "FX", ok,
           f"identities {ident:.1e}; quadrature {quad:.1e}; reference constructions {ok_reference}; "
           f"random violations {violations}; drift max |z| {max(abs(d[2]) for d in drift):.2f}")
    assert ok_ident and ok_quad and ok_reference and ok_search and ok_drift


def _files(d: Path) -> list[Path]:
    return sorted(p.relative_to(d) for p in d.rglob("*") if p.is_file())


def test_criterion_7_determinism(report, tmp_path, monkeypatch):
    monkeypatch.delenv("LEVYITO_SEED", raising=False)
    names = bundled_scenarios()
    assert {"vasicek_classical", "chaos_flat_curve", "fx_gbm_3ccy"} <= set(names)
    mismatched, codes = [], {}
    for name in names:
        runs = []
        for tag, workers in (("a", "1"), ("b", "4"), ("c", "1")):
            out = tmp_path / tag / name
            codes[(name, tag)] = main(["--config", name, "--out", str(out), "--quiet", "--workers", workers])
            runs.append(out)
        ref = _files(runs[0])
        assert ref, name
        for other in runs[1:]:
            if _files(other) != ref or any(not filecmp.cmp(runs[0] / f, other / f, shallow=False) for f in ref):
                mismatched.append(name)
    ok = not mismatched and all(c == 0 for c in codes.values())
    report(7, "determinism", ok, f"{len(names)} scenarios x 3 runs; mismatched {mismatched}")
    assert not mismatched
    assert all(c == 0 for c in codes.values()), codes
