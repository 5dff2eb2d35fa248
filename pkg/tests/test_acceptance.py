"""Exit criteria for the package, one test per criterion.

Each test records a PASS/FAIL line that is repeated in the terminal summary.
"""

import math
import time

import numpy as np
import pytest

from drugrelease.eigen import solve_axial, solve_radial
from drugrelease.fit import FitProblem, fit_scalar
from drugrelease.model import (
    build_eigensystem,
    concentration,
    first_rate,
    half_release_time,
    release_closed_form,
    release_flux_integral,
)
from drugrelease.oracle import GridSpec, simulate_release
from drugrelease.scenarios import (
    BULK_DIFFUSIVITY,
    COATING_DIFFUSIVITY,
    HEIGHT,
    RADIUS,
    SCENARIOS,
    THICKNESS_20MIN,
    THICKNESS_30MIN,
    reference_params,
    release_window,
    synthetic_curve,
)
from drugrelease.specfun import bessel_j01
from oracles import axial_roots, radial_roots, series_j


@pytest.mark.parametrize("name", SCENARIOS)
def test_c1_oracle_equivalence(reference_systems, record, name):
    sys = reference_systems[name]
    times = release_window(sys, 0.01, 0.99, 20)
    start = time.perf_counter()
    res = simulate_release(sys.params, GridSpec(80, 60), times)
    elapsed = time.perf_counter() - start
    diff = np.abs(res.release.fractions - release_closed_form(sys, times)).max()
    ok = record(f"1 oracle equivalence [{name}]", diff <= 1e-2 and elapsed <= 120,
                f"max|dF|={diff:.2e} (<=1e-2), {elapsed:.1f}s (<=120s)")
    assert ok


@pytest.mark.parametrize("name", SCENARIOS)
def test_c2_closed_form_vs_flux_integral(reference_systems, record, name):
    sys = reference_systems[name]
    times = release_window(sys, 0.01, 0.99, 10)
    start = time.perf_counter()
    diff = np.abs(release_closed_form(sys, times) - release_flux_integral(sys, times)).max()
    elapsed = time.perf_counter() - start
    ok = record(f"2 closed form vs flux integral [{name}]", diff <= 1e-6,
                f"max diff={diff:.2e} (<=1e-6), {elapsed:.1f}s")
    assert ok


def _volume_integral(sys, t, n=20):
    p = sys.params
    x, w = np.polynomial.legendre.leggauss(n)
    r = 0.5 * p.radius * (x + 1)
    z = 0.5 * p.height * (x + 1)
    rr, zz = np.meshgrid(r, z, indexing="ij")
    weights = np.outer(w, w) * 2 * np.pi * rr * 0.25 * p.radius * p.height
    return float((weights * concentration(sys, rr, zz, t)).sum())


@pytest.mark.parametrize("name", ["coated_20min", "coated_30min"])
def test_c3_series_completeness(reference_systems, record, name):
    sys = reference_systems[name]
    assert sys.truncation == (250, 250)
    avg_err = abs(_volume_integral(sys, 0.0) - 1.0)
    f_large = release_closed_form(sys, 30.0 / first_rate(sys))
    ok = record(f"3 series completeness [{name}]", avg_err <= 5e-3 and 0.999 <= f_large <= 1.001,
                f"|avg c(0)/c0-1|={avg_err:.2e} (<=5e-3), F(t_large)={f_large:.7f} in [0.999,1.001]")
    assert ok


@pytest.mark.parametrize("biot", [0.1, 3.0, 300.0, 1e4])
def test_c4_eigenvalues(record, biot):
    count = 50
    g = solve_radial(biot, RADIUS, count).gammas
    g_ref = radial_roots(biot, (count + 1) * math.pi)[:count]
    rad_err = np.abs(g / g_ref - 1).max()

    H = biot / RADIUS
    beta = solve_axial(H, HEIGHT, count).eigenvalues
    b_ref = axial_roots(H, HEIGHT, (count + 1) * math.pi / HEIGHT + H)[:count]
    ax_err = np.abs(beta / b_ref - 1).max()

    k = np.floor(beta * HEIGHT / math.pi + 0.5).astype(int)
    k_pole = int(math.floor(H * HEIGHT / math.pi + 0.5))
    counts = np.bincount(k)
    counts_ok = all(
        n == ((1 if k_pole == 0 else 0) if i == 0 else (2 if i == k_pole else 1))
        for i, n in enumerate(counts[:-1])
    )
    ok = record(f"4 eigenvalues [biot={biot:g}]", rad_err <= 1e-9 and ax_err <= 1e-9 and counts_ok,
                f"radial rel err={rad_err:.1e}, axial rel err={ax_err:.1e} (<=1e-9), "
                f"interval counts ok={counts_ok} (pole interval k={k_pole})")
    assert ok


def test_c4_radial_interlacing(record):
    # one radial root per J0 oscillation, independently located zeros of J0
    from scipy.special import jn_zeros

    zeros = np.concatenate([[0.0], jn_zeros(0, 50)])
    ok = True
    for biot in (0.1, 3.0, 300.0, 1e4):
        g = solve_radial(biot, RADIUS, 50).gammas
        ok &= bool(np.all((g > zeros[:-1]) & (g < zeros[1:])))
    assert record("4 radial root per oscillation", ok, "each gamma_n in (j0_{n-1}, j0_n)")


def test_c5_limits(record):
    from scipy.special import jn_zeros

    g = solve_radial(1e6, RADIUS, 20).gammas
    rad = np.abs(g - jn_zeros(0, 20)).max()
    m = np.arange(1, 21)
    beta = solve_axial(1e6 / HEIGHT, HEIGHT, 20).eigenvalues
    ax = np.abs(beta * HEIGHT / (m * math.pi) - 1).max()
    ok = record("5 Dirichlet limits", rad <= 1e-4 and ax <= 1e-3,
                f"radial |gamma-j0|={rad:.1e} (<=1e-4), axial rel={ax:.1e} (<=1e-3)")
    assert ok


def test_c6_fit_recovery(record):
    start = time.perf_counter()
    unc = reference_params("uncoated")
    c20 = reference_params("coated_20min")
    c30 = reference_params("coated_30min")

    d = fit_scalar(FitProblem(synthetic_curve(unc), unc, "D", (1e-11, 1e-9)), rel_tol=1e-6).estimate
    dc = fit_scalar(FitProblem(synthetic_curve(c20), c20, "D_c", (1e-12, 1e-9)), rel_tol=1e-6).estimate
    l = fit_scalar(FitProblem(synthetic_curve(c30), c30, "l", (1e-5, 1e-3)), rel_tol=1e-6).estimate
    noiseless = [abs(d / BULK_DIFFUSIVITY - 1), abs(dc / COATING_DIFFUSIVITY - 1), abs(l / THICKNESS_30MIN - 1)]

    d_hits = l_hits = 0
    for seed in range(20):
        noisy_u = synthetic_curve(unc, noise=0.01, seed=seed)
        est = fit_scalar(FitProblem(noisy_u, unc, "D", (1e-11, 1e-9)), rel_tol=1e-4).estimate
        d_hits += abs(est / BULK_DIFFUSIVITY - 1) <= 0.02
        noisy_c = synthetic_curve(c30, noise=0.01, seed=seed)
        est = fit_scalar(FitProblem(noisy_c, c30, "l", (1e-5, 1e-3)), rel_tol=1e-4).estimate
        l_hits += abs(est / THICKNESS_30MIN - 1) <= 0.05
    elapsed = time.perf_counter() - start
    ok = record("6 fit recovery", max(noiseless) <= 5e-3 and d_hits >= 18 and l_hits >= 18 and elapsed <= 300,
                f"noiseless rel err D/D_c/l={noiseless[0]:.1e}/{noiseless[1]:.1e}/{noiseless[2]:.1e} (<=5e-3); "
                f"noisy D {d_hits}/20, l {l_hits}/20 (>=18); {elapsed:.0f}s (<=300s)")
    assert ok


def test_c7_half_release_ordering(reference_systems, record):
    t = [half_release_time(reference_systems[name]) for name in SCENARIOS]
    ok = record("7 half-release ordering", t[0] < t[1] < t[2],
                "t_half uncoated/125um/314um = " + "/".join(f"{v / 3600:.3f}h" for v in t))
    assert ok


def test_c8_bessel_accuracy(record):
    x = np.linspace(0.0, 50.0, 1000)
    j0, j1 = bessel_j01(x)
    ref0 = np.array([series_j(0, v) for v in x])
    ref1 = np.array([series_j(1, v) for v in x])
    err = max(np.abs(j0 - ref0).max(), np.abs(j1 - ref1).max())
    assert record("8 Bessel accuracy", err <= 1e-10, f"max abs err={err:.1e} (<=1e-10) on 1000 points in [0,50]")
