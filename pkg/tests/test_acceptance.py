"""Acceptance criteria, one PASS/FAIL line each.

The lines are printed as the tests run and repeated in the
"acceptance criteria" section of the pytest summary.  Parts that take
minutes or more are marked ``expensive`` and listed as GATED unless pytest
is given ``--expensive``.
"""

from __future__ import annotations

import numpy as np
import pytest

from wbflux.analysis import l1_error_vs_projection
from wbflux.entropy import cell_entropy_residual, semi_kruzkov_pair, smoothed_boundary_pair
from wbflux.experiments import (
    TOLERANCES,
    error_report,
    preset,
    reference_distances,
    run_preset,
    run_table,
    with_horizon,
)
from wbflux.flux import chi_density_h, entropy_flux_G, eo_flux, make_split_flux, scheme_operator_H
from wbflux.model import burgers_hopf, custom_model, evaluate_D, invert_D, lipschitz_on
from wbflux.scheme import StepPolicy, compute_bound_envelope

BURGERS = burgers_hopf()
SPLIT = make_split_flux(BURGERS)
C = 3.0
SEED = 20240601


def rel(got, want):
    return abs(got - want) / abs(want)


# {{{ tables


def test_c1_well_balancedness(verdict):
    p = preset("tc1")
    errs = {dx: error_report(p, run_preset(p, "well_balanced", dx)).numerical_error for dx in (0.1, 0.01)}
    ok = all(e <= 1e-8 for e in errs.values())
    detail = ", ".join(f"dx={dx:g} num={e:.2e}" for dx, e in errs.items())
    assert verdict("criterion 1 well-balancedness (adaptive dt)", ok, f"{detail} (<= 1e-8)")


@pytest.mark.parametrize("dt_mode", ["adaptive", "published"])
def test_c2_tc1_l1_errors(verdict, dt_mode):
    outcome = run_table("tc1", "well_balanced", "1-2", dt_mode=dt_mode)
    detail = ", ".join(
        f"dx={r.dx:g} l1={r.l1_error:.4e}" for r in outcome.reports
    )
    assert verdict(f"criterion 2 tc1 well-balanced L1 errors ({dt_mode} dt)", outcome.passed, f"{detail} vs 5.02e-2, 5.00e-3 ±2%")


def test_c3_standard_drift_row1(verdict):
    outcome = run_table("tc1", "standard", "1")
    rep = outcome.reports[0]
    tol = TOLERANCES[("tc1_equilibrium", "standard")]
    ok_num = rel(rep.numerical_error, 4.90e-2) <= tol.num_rel
    ok_l1 = rel(rep.l1_error, 5.07e-2) <= tol.l1_rel
    a = verdict(
        "criterion 3 tc1 standard row 1 num. error", ok_num,
        f"{rep.numerical_error:.4e} vs 4.90e-2 ±25% ({(rep.numerical_error / 4.90e-2 - 1):+.1%})",
    )
    b = verdict(
        "criterion 3 tc1 standard row 1 L1 error", ok_l1,
        f"{rep.l1_error:.4e} vs 5.07e-2 ±25% ({(rep.l1_error / 5.07e-2 - 1):+.1%})",
    )
    assert a and b


@pytest.mark.expensive
def test_c3_standard_eoc(verdict):
    outcome = run_table("tc1", "standard", "1-2", include_expensive=True)
    eoc = outcome.reports[1].eoc
    ok = eoc is not None and abs(eoc - 1.0) <= 0.15
    assert verdict("criterion 3 tc1 standard EOC rows 1-2", ok, f"EOC {eoc:.3f} vs 1.0 ±0.15")


def test_c4_tc3_rows(verdict):
    outcome = run_table("tc3", "well_balanced", "1-2")
    detail = ", ".join(f"dx={r.dx:g} l1={r.l1_error:.4e}" for r in outcome.reports)
    assert verdict("criterion 4 tc3 rows 1-2", outcome.passed, f"{detail} vs 4.388e-1, 3.164e-1 ±10%")


@pytest.mark.expensive
def test_c4_tc3_deep_rows(verdict):
    outcome = run_table("tc3", "well_balanced", "3-4", include_expensive=True)
    detail = ", ".join(f"dx={r.dx:g} l1={r.l1_error:.4e}" for r in outcome.reports)
    assert verdict("criterion 4 tc3 rows 3-4 (gated)", outcome.passed, f"{detail} vs 2.678e-2, 8.421e-4 ±10%")


@pytest.mark.expensive
def test_c2_tc1_deep_rows(verdict):
    outcome = run_table("tc1", "well_balanced", "3-4", include_expensive=True, dt_mode="adaptive")
    detail = ", ".join(f"dx={r.dx:g} l1={r.l1_error:.4e} num={r.numerical_error:.1e}" for r in outcome.reports)
    assert verdict("criterion 2 tc1 well-balanced rows 3-4 (gated, adaptive dt)", outcome.passed, detail)

# }}}


# {{{ figures


def test_c5_riemann_against_reference(verdict):
    p = preset("tc2")
    dist = reference_distances(p, 0.1, n_ref=4000, cache_dir=False)
    wb, std = dist["well_balanced"][2.75], dist["standard"][2.75]
    assert verdict("criterion 5 tc2 at t=2.75", wb < std, f"well-balanced {wb:.4e} < standard {std:.4e}")


def test_c6_discontinuous_topography(verdict):
    p = preset("tc4")
    errs = {}
    for kind in ("well_balanced", "standard"):
        res = run_preset(p, kind, 0.1)
        errs[kind] = l1_error_vs_projection(res.final, p.exact, res.disc, p.exact_jumps)
    wb, std = errs["well_balanced"], errs["standard"]
    ok = wb <= 1e-8 and std >= 10 * wb
    assert verdict("criterion 6 tc4 at t=3, 40 cells", ok, f"well-balanced drift {wb:.2e} (<= 1e-8), standard {std:.3e} (>= 10x)")

# }}}


# {{{ discrete entropy and kinetic properties


def test_c7_cell_entropy_inequality(verdict):
    rng = np.random.default_rng(SEED)
    lip = lipschitz_on(BURGERS, C)
    worst = -np.inf
    n = 10_000
    for _ in range(n):
        u, v, w, k = rng.uniform(-C, C, 4)
        lam = rng.uniform(0, 1) / lip
        delta = 10 ** rng.uniform(-3, 0)
        sign = "plus" if rng.uniform() < 0.5 else "minus"
        pair = smoothed_boundary_pair(BURGERS, k, delta, sign)
        worst = max(worst, cell_entropy_residual(SPLIT, pair, lam, u, v, w))
    assert verdict("criterion 7 cell entropy inequality", worst <= 1e-10, f"max residual {worst:.3e} over {n} samples (<= 1e-10)")


def _h_integral(lam, u, v, w):
    """Integral of h per sample, split at its jump points (exact for Burgers)."""
    x, wt = np.polynomial.legendre.leggauss(4)
    knots = np.sort(np.stack([u, v, w, np.zeros_like(u)], axis=1), axis=1)
    total = np.zeros_like(u)
    for i in range(3):
        a, b = knots[:, i : i + 1], knots[:, i + 1 : i + 2]
        xi = 0.5 * (a + b) + 0.5 * (b - a) * x
        h = chi_density_h(SPLIT, lam[:, None], u[:, None], v[:, None], w[:, None], xi)
        total += 0.5 * (b - a)[:, 0] * np.sum(wt * h, axis=1)
    return total


def test_c8_h_and_H_bounds(verdict):
    rng = np.random.default_rng(SEED + 1)
    n = 10_000
    u, v, w = rng.uniform(-C, C, (3, n))
    lam = rng.uniform(0, 1, n) / np.maximum(np.maximum(abs(u), abs(v)), abs(w))

    xi = np.linspace(-C, C, 241)
    h = chi_density_h(SPLIT, lam[:, None], u[:, None], v[:, None], w[:, None], xi[None, :])
    s = np.sign(xi)[None, :] * h
    ok_h = bool(np.all(s >= -1e-12) and np.all(s <= 1 + 1e-12))

    H = scheme_operator_H(SPLIT, lam, u, v, w)
    excess = float(np.max(np.abs(H) - np.maximum(np.maximum(abs(u), abs(v)), abs(w))))
    quad_err = float(np.max(np.abs(_h_integral(lam, u, v, w) - H)))

    a = verdict("criterion 8 0 <= sign(xi) h <= 1", ok_h, f"range [{s.min():.3g}, {s.max():.3g}] on {n} samples")
    b = verdict("criterion 8 |H| <= max(|u|,|v|,|w|)", excess <= 1e-12, f"max excess {excess:.2e}")
    c = verdict("criterion 8 quadrature of h equals H", quad_err <= 1e-6, f"max error {quad_err:.2e} (<= 1e-6)")
    assert a and b and c


def test_c9_consistency_and_inverse(verdict):
    rng = np.random.default_rng(SEED + 2)
    u = rng.uniform(-C, C, 1000)
    g_err = float(np.max(np.abs(eo_flux(SPLIT, u, u) - BURGERS.f(u))))

    G_err = 0.0
    for x in u:
        pair = smoothed_boundary_pair(BURGERS, rng.uniform(-C, C), 10 ** rng.uniform(-3, 0), rng.choice(["plus", "minus"]))
        G_err = max(G_err, abs(entropy_flux_G(SPLIT, pair, x, x) - float(pair.q(x))))

    cubic = custom_model("u + u**3", "1 + 3*u**2", "1 + 0*u", d_prime_min=1.0, b_lipschitz=0.0)
    s = rng.uniform(-2, 2, 200)
    rt = max(
        float(np.max(np.abs(invert_D(model, evaluate_D(model, s)) - s)))
        for model in (BURGERS, cubic)
    )

    grid = np.linspace(-C, C, 4001)
    close = 0.0
    for delta in (1e-3, 1e-2, 0.1, 0.5):
        for sign in ("plus", "minus"):
            k = float(rng.uniform(-1, 1))
            gap = np.max(np.abs(smoothed_boundary_pair(BURGERS, k, delta, sign).eta(grid) - semi_kruzkov_pair(BURGERS, k, sign).eta(grid)))
            close = max(close, float(gap / delta))

    a = verdict("criterion 9 g(u,u) = f(u)", g_err <= 1e-10, f"max error {g_err:.2e}")
    b = verdict("criterion 9 G(u,u) = q(u)", G_err <= 1e-10, f"max error {G_err:.2e}")
    c = verdict("criterion 9 D^-1(D(s)) = s", rt <= 1e-12, f"max error {rt:.2e}")
    d = verdict("criterion 9 smoothed pairs within delta", close <= 1.0 + 1e-12, f"max gap/delta {close:.3f}")
    assert a and b and c and d


def test_c10_boundedness(verdict):
    hand = compute_bound_envelope(with_horizon(preset("tc1"), 0.01).problem, 0.1).c_dx_T
    ok_hand = abs(hand - 2.4857) <= 1e-3

    p = with_horizon(preset("tc1"), 0.05)
    worst = -np.inf
    ok_run = True
    for kind in ("well_balanced", "standard"):
        res = run_preset(p, kind, 0.1, StepPolicy("paper_bound"))
        c = res.envelope.c_dx_T
        ok_run &= bool(res.max_abs.size == res.n_steps and np.all(res.max_abs <= c))
        worst = max(worst, float(np.max(res.max_abs)) / c)

    a = verdict("criterion 10 envelope hand value", ok_hand, f"C = {hand:.5f} vs 2.4857 ±1e-3")
    b = verdict("criterion 10 max|u^n| <= C every step", ok_run, f"max ratio {worst:.4f}")
    assert a and b

# }}}
