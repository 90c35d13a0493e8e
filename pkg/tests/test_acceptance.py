"""Acceptance criteria, one test and one PASS/FAIL summary line each."""

import math
import time
from fractions import Fraction

import numpy as np

from symvi.cases import CASES, FIG6_ALPHAS, FIG6_BASES
from symvi.conditions import Convexity, VerdictKind, check_convexity, verdict
from symvi.densities import (
    BaseDensity,
    ScaleMatrix,
    gaussian_family,
    gaussian_target,
    laplace_family,
    make_bimodal_2d,
    make_target_p1,
)
from symvi.divergences import (
    DivergenceKind,
    DivergenceSpec,
    check_full_vs_simplified,
    divergence_full,
    objective_simplified,
    weight_function,
)
from symvi.geometry import HalfspacePartition, Region, classify_point, delta_objective_decomposition, delta_w
from symvi.landscape import StationaryKind, classify_at_mean, stationarity_residual, sweep, to_divergence

FKL = DivergenceSpec.fkl()


def _d_residual(spec, p, fam):
    """Stationarity residual of the divergence itself (objective residual times the affine slope)."""
    a, _ = to_divergence(spec, p, fam)
    return a * stationarity_residual(spec, p, fam)


def test_criterion_1_gaussian_closed_forms(acceptance):
    p, fam = gaussian_target(0.0, 1.0), gaussian_family(1.0)
    alpha2 = DivergenceSpec.alpha_div(2.0)
    t0 = time.perf_counter()
    errs_fkl, errs_a = [], []
    for nu in (-2.0, -1.0, 0.5, 1.0, 2.0):
        errs_fkl.append(abs(float(divergence_full(FKL, p, fam, nu)) - nu**2 / 2))
        errs_a.append(abs(float(divergence_full(alpha2, p, fam, nu)) - math.expm1(nu**2) / 2))
    elapsed = time.perf_counter() - t0
    ok = max(errs_fkl) <= 1e-8 and max(errs_a) <= 1e-7 and elapsed < 1.0
    acceptance(1, ok, f"max FKL err {max(errs_fkl):.2e}, max alpha=2 err {max(errs_a):.2e}, {elapsed:.3f} s")
    assert ok


def test_criterion_2_case_1_1(acceptance):
    spec, p, fam = CASES["1.1"].build()
    t0 = time.perf_counter()
    res = sweep(spec, p, fam)
    cls = classify_at_mean(res)
    elapsed = time.perf_counter() - t0
    ok = cls.kind is StationaryKind.UNIQUE_GLOBAL_MIN and abs(cls.at) <= res.config.step and elapsed < 30.0
    acceptance(2, ok, f"{cls} over {len(res.nu)} grid points in {elapsed:.2f} s")
    assert ok


def test_criterion_3_case_1_2_plateau(acceptance, case_sweeps):
    res = case_sweeps["1.2"]
    inside = np.abs(res.nu) <= 3.0 + 1e-9
    plateau = res.divergence[inside]
    spread = float((plateau.max() - plateau.min()) / abs(plateau.min()))
    spec, p, fam = CASES["1.2"].build()
    edge = [float(divergence_full(spec, p, fam, v)) for v in (-3.01, 3.01)]
    ok = spread <= 1e-9 and min(edge) > plateau.max()
    acceptance(
        3,
        ok,
        f"relative spread on [-3, 3] {spread:.2e}; D(+-3.01) - plateau = {min(edge) - plateau.max():.3e}",
    )
    assert ok


def test_criterion_4_local_maxima(acceptance, case_sweeps):
    parts, ok = [], True
    for name in ("2.2", "3.2"):
        cls = classify_at_mean(case_sweeps[name])
        r = _d_residual(*CASES[name].build())
        good = str(cls) == "LocalMax(0.00)" and r <= 1e-6
        ok &= good
        parts.append(f"{name} {cls} residual {r:.1e}")
    acceptance(4, ok, "; ".join(parts))
    assert ok


def test_criterion_5_case_verdicts(acceptance, case_sweeps):
    expected = {"2.1": "UniqueGlobalMin(0.00)", "3.1": "UniqueGlobalMin(0.00)", "4.1": "UniqueGlobalMin(0.00)", "4.2": "LocalMax(0.00)"}
    parts, ok = [], True
    for name, want in expected.items():
        cls = classify_at_mean(case_sweeps[name])
        got = str(cls)
        if cls.kind is StationaryKind.OTHER:
            got += f" [argmin {cls.details['argmin']:.2f}]"
        good = str(cls) == want
        ok &= good
        parts.append(f"{name} {got}" + ("" if good else f" (expected {want})"))
    acceptance(5, ok, "; ".join(parts))
    assert ok


def test_criterion_6_verdict_landscape_consistency(acceptance, case_sweeps):
    parts, ok = [], True
    for name, case in CASES.items():
        spec, p, fam = case.build()
        v = verdict(spec, fam, p)
        res = case_sweeps[name]
        cls = classify_at_mean(res)
        at_mean = cls.kind is StationaryKind.UNIQUE_GLOBAL_MIN and abs(cls.at - res.mean) <= res.config.step
        good = (v.result is VerdictKind.UNIQUE) == at_mean
        ok &= good
        parts.append(f"{name} {v.result.value}/{cls.kind.value}" + ("" if good else " MISMATCH"))
    acceptance(6, ok, ", ".join(parts))
    assert ok


def test_criterion_7_fig6_grid(acceptance):
    grid = {
        (b, a): check_convexity(weight_function(DivergenceSpec.alpha_div(a), make())).verdict
        for b, make in FIG6_BASES.items()
        for a in FIG6_ALPHAS
    }
    strict = all(grid[b, a] is Convexity.STRICT for b in ("gaussian", "laplace") for a in (1.1, 2.0))
    not_convex = all(grid[b, 0.1] is Convexity.NOT_CONVEX for b in FIG6_BASES)
    no_flat = Convexity.CONVEX not in grid.values()
    ok = strict and not_convex and no_flat
    acceptance(
        7,
        ok,
        f"gaussian/laplace strict at 1.1, 2.0: {strict}; all NotConvex at 0.1: {not_convex}; "
        f"no ConvexNotStrict in {len(grid)} cells: {no_flat}",
    )
    assert ok


def test_criterion_8_analytic_delta_w(acceptance):
    fam = laplace_family(4.0)
    w = weight_function(FKL, fam.base)
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(50):
        nup = float(rng.uniform(0.0, 10.0)) or 1.0
        x = float(rng.uniform(-10.0, 10.0))
        if x <= 0:
            want = nup / 4
        elif x < nup:
            want = (-2 * x + nup) / 4
        else:
            want = -nup / 4
        got = float(delta_w(w, fam.scale, nup, x))
        worst = max(worst, abs(got - want) / max(1.0, abs(x), nup))
    p1 = make_target_p1()
    sums, h4s = [], []
    for nup in np.linspace(0.0, 3.0, 31)[1:]:
        d = delta_objective_decomposition(FKL, p1, fam, float(nup))
        sums.append(abs(d.on_H2 + d.on_H3))
        h4s.append(abs(d.on_H4))
    ok = worst <= 1e-15 and max(sums) <= 1e-12 and max(h4s) == 0.0
    acceptance(
        8,
        ok,
        f"delta_w max scaled error {worst:.1e} on 50 pairs; p1 |H2+H3| <= {max(sums):.1e}, |H4| <= {max(h4s):.1e} for 30 nu'",
    )
    assert ok


def _rational_pd(rng):
    A = [[Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, 6))) for _ in range(2)] for _ in range(2)]
    return [[sum(A[i][k] * A[j][k] for k in range(2)) + (1 if i == j else 0) for j in range(2)] for i in range(2)]


def _quad(M, u, v):
    return sum(u[i] * M[i][j] * v[j] for i in range(2) for j in range(2))


def test_criterion_9_property_suites(acceptance, case_sweeps):
    rng = np.random.default_rng(9)

    # norm form and inner-product form of the halfspace test agree exactly
    mismatches = trials = 0
    while trials < 1000:
        S = _rational_pd(rng)
        det = S[0][0] * S[1][1] - S[0][1] * S[1][0]
        Sinv = [[S[1][1] / det, -S[0][1] / det], [-S[1][0] / det, S[0][0] / det]]
        tau = [Fraction(int(rng.integers(-40, 41)), int(rng.integers(1, 8))) for _ in range(2)]
        nup = [Fraction(int(rng.integers(-40, 41)), int(rng.integers(1, 8))) for _ in range(2)]
        if not any(nup):
            continue
        trials += 1
        diff = [tau[0] - nup[0], tau[1] - nup[1]]
        by_norm = _quad(Sinv, diff, diff) >= _quad(Sinv, tau, tau)
        by_inner = _quad(Sinv, tau, nup) <= _quad(Sinv, nup, nup) / 2
        mismatches += by_norm != by_inner
    halfspace_ok = mismatches == 0

    # midpoint inequality w(eta - nu') + w(eta + nu') >= 2 w(eta) for convex weights
    weights = [
        weight_function(FKL, BaseDensity.gaussian(2)),
        weight_function(DivergenceSpec.alpha_div(1.5), BaseDensity.gaussian(2)),
        weight_function(FKL, BaseDensity.laplace()),
        weight_function(DivergenceSpec.alpha_div(2.0), BaseDensity.laplace()),
    ]
    worst_mid = 0.0
    for i in range(500):
        w = weights[i % len(weights)]
        if w.dim == 1:
            S = ScaleMatrix.isotropic(float(rng.uniform(0.2, 3.0)), 1)
            eta, nup = rng.uniform(-4, 4), rng.uniform(-4, 4)
        else:
            s1, s2, rho = rng.uniform(0.2, 3.0), rng.uniform(0.2, 3.0), rng.uniform(-0.9, 0.9)
            off = rho * math.sqrt(s1 * s2)
            S = ScaleMatrix(np.array([[s1, off], [off, s2]]))
            eta, nup = rng.uniform(-4, 4, 2), rng.uniform(-4, 4, 2)
        gap = float(w(S.whiten(eta - nup)) + w(S.whiten(eta + nup)) - 2 * w(S.whiten(eta)))
        worst_mid = min(worst_mid, gap)
    midpoint_ok = worst_mid >= -1e-12

    sym = max(res.symmetry_error() for res in case_sweeps.values())
    low = min(float(res.divergence.min()) for res in case_sweeps.values())

    affine_ok = True
    for case in CASES.values():
        spec, p, fam = case.build()
        for nu1, nu2 in ((0.0, 1.3), (-2.5, 4.0), (0.7, -7.1)):
            affine_ok &= check_full_vs_simplified(spec, p, fam, nu1, nu2, tol=1e-8)

    ok = halfspace_ok and midpoint_ok and sym <= 1e-8 and low >= -1e-9 and affine_ok
    acceptance(
        9,
        ok,
        f"halfspace exact {trials - mismatches}/{trials}; midpoint worst gap {worst_mid:.1e} on 500 draws; "
        f"symmetry {sym:.1e}; min divergence {low:.3g}; full-vs-simplified {affine_ok}",
    )
    assert ok


def test_criterion_10_stationarity(acceptance, case_sweeps):
    parts, ok = [], True
    for name, case in CASES.items():
        spec, p, fam = case.build()
        r = _d_residual(spec, p, fam)
        ratio = r / case_sweeps[name].scale
        ok &= ratio <= 1e-6
        parts.append(f"{name} {ratio:.1e}")

    p2d, fam2d = make_bimodal_2d(), gaussian_family(1.0, 2)
    r2d = stationarity_residual(FKL, p2d, fam2d)
    axis = np.arange(-15.0, 15.0 + 1e-9, 2.5)
    vals = [float(objective_simplified(FKL, p2d, fam2d, np.array([x, y]))) for x in axis for y in axis]
    ratio2d = r2d / (max(vals) - min(vals))
    ok &= ratio2d <= 1e-6
    parts.append(f"2-D bimodal {ratio2d:.1e}")
    acceptance(10, ok, "residual/scale " + ", ".join(parts))
    assert ok
