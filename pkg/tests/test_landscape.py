import numpy as np
import pytest

from symvi.cases import CASES
from symvi.densities import gaussian_family, make_bimodal_2d, uniform_target
from symvi.divergences import DivergenceSpec, divergence_full
from symvi.errors import NonConvergence
from symvi.landscape import (
    StationaryKind,
    SweepConfig,
    SweepResult,
    classify_at_mean,
    stationarity_residual,
    sweep,
)
from symvi.quadrature import QuadratureConfig

FKL = DivergenceSpec.fkl()


def _synthetic(f, lo=-5.0, hi=5.0, step=0.01):
    cfg = SweepConfig(lo, hi, step)
    nu = cfg.grid()
    return SweepResult(nu, f(nu), cfg, FKL, "synthetic", "synthetic", 0.0)


def test_grid_shape():
    g = SweepConfig().grid()
    assert g.size == 3001
    assert g[0] == -15.0 and g[-1] == 15.0 and g[1500] == 0.0
    assert np.array_equal(g, -g[::-1])
    assert np.allclose(np.diff(g), 0.01, rtol=0, atol=1e-12)


@pytest.mark.parametrize("kwargs", [dict(lo=1.0, hi=1.0), dict(step=0.0), dict(lo=-1e4, hi=1e4, step=1e-3), dict(tol_eq=0.0)])
def test_sweep_config_validation(kwargs):
    with pytest.raises(ValueError):
        SweepConfig(**kwargs)


def test_synthetic_kinds():
    assert classify_at_mean(_synthetic(lambda v: v**2)).kind is StationaryKind.UNIQUE_GLOBAL_MIN
    plateau = classify_at_mean(_synthetic(lambda v: np.maximum(np.abs(v) - 2.0, 0.0) ** 2))
    assert plateau.kind is StationaryKind.PLATEAU and plateau.interval == (-2.0, 2.0)
    lm = classify_at_mean(_synthetic(lambda v: (v**2 - 4.0) ** 2))
    assert lm.kind is StationaryKind.LOCAL_MAX and lm.at == 0.0
    # two mirrored global minima but a local minimum at the mean
    other = classify_at_mean(_synthetic(lambda v: 0.01 * (v**2 - 9.0) ** 2 + 5 * np.exp(-((np.abs(v) - 1) ** 2))))
    assert other.kind is StationaryKind.OTHER


def test_gradient_at_mean_uses_grid():
    res = _synthetic(lambda v: (v - 0.5) ** 2)
    c = classify_at_mean(res)
    assert c.gradient == pytest.approx(-1.0, abs=1e-12)
    assert c.kind is StationaryKind.UNIQUE_GLOBAL_MIN and c.at == pytest.approx(0.5, abs=1e-12)


def test_mean_outside_range():
    with pytest.raises(ValueError):
        classify_at_mean(_synthetic(lambda v: v**2), mu=7.0)


@pytest.mark.parametrize(
    "name, label",
    [
        ("1.1", "UniqueGlobalMin(0.00)"),
        ("1.2", "Plateau([-3.00, 3.00])"),
        ("2.1", "UniqueGlobalMin(0.00)"),
        ("2.2", "LocalMax(0.00)"),
        ("3.1", "UniqueGlobalMin(0.00)"),
        ("3.2", "LocalMax(0.00)"),
        ("4.1", "UniqueGlobalMin(0.00)"),
    ],
)
def test_case_classifications(case_sweeps, name, label):
    assert str(classify_at_mean(case_sweeps[name])) == label


def test_case_1_2_plateau_endpoints(case_sweeps):
    c = classify_at_mean(case_sweeps["1.2"])
    assert c.interval == (-3.0, 3.0)


@pytest.mark.parametrize("name", list(CASES))
def test_sweep_even_about_mean(case_sweeps, name):
    res = case_sweeps[name]
    assert res.symmetry_error() <= 1e-8
    assert res.symmetry_error() <= 1e-8 * res.scale


@pytest.mark.parametrize("name", list(CASES))
def test_step_refinement_keeps_kind(case_sweeps, name):
    spec, p, fam = CASES[name].build()
    fine = sweep(spec, p, fam, SweepConfig(step=0.005))
    assert classify_at_mean(fine).kind is classify_at_mean(case_sweeps[name]).kind


def test_worker_count_does_not_change_output():
    spec, p, fam = CASES["2.2"].build()
    cfg = SweepConfig(-2.0, 2.0, 0.05)
    a = sweep(spec, p, fam, cfg, workers=1)
    b = sweep(spec, p, fam, cfg, workers=2)
    assert np.array_equal(a.divergence, b.divergence) and np.array_equal(a.nu, b.nu)


def test_quadrature_failure_reports_nu():
    spec, p, fam = CASES["2.2"].build()
    bad = QuadratureConfig(rtol=1e-15, atol=1e-300, max_subdivisions=1, nodes_per_panel=2)
    with pytest.raises(NonConvergence, match="nu="):
        sweep(spec, p, fam, SweepConfig(-1.0, 1.0, 0.5), bad)


@pytest.mark.parametrize("name", ["1.1", "2.2"])
def test_stationarity_residual_small(name):
    spec, p, fam = CASES[name].build()
    assert stationarity_residual(spec, p, fam, 0.0, 1e-4) <= 1e-6


def test_stationarity_residual_asymmetric_control():
    # FKL objective with a unit Gaussian family is E(X - nu)^2 / 2 + c, so the
    # derivative at nu = 0 is -E X = -1 for Unif[0, 2]
    p = uniform_target(0.0, 2.0, mean=0.0)
    r = stationarity_residual(FKL, p, gaussian_family(1.0), 0.0, 1e-4)
    assert r == pytest.approx(1.0, abs=1e-8)


def test_stationarity_residual_2d():
    r = stationarity_residual(FKL, make_bimodal_2d(), gaussian_family(1.0, 2), h=1e-4)
    assert r <= 1e-6


def test_stationarity_residual_rejects_bad_h():
    spec, p, fam = CASES["1.1"].build()
    with pytest.raises(ValueError):
        stationarity_residual(spec, p, fam, 0.0, 0.0)


def test_case_4_2_mean_is_local_min_by_mpmath_oracle():
    # independent high-precision alpha-divergence for (alpha 0.7, p2, Laplace b=4)
    import mpmath

    mpmath.mp.dps = 30
    a = mpmath.mpf("0.7")
    pieces = [(-9, -3, mpmath.mpf("0.495") / 6), (3, 9, mpmath.mpf("0.495") / 6), (mpmath.mpf("-0.3"), mpmath.mpf("0.3"), mpmath.mpf("0.01") / mpmath.mpf("0.6"))]

    def oracle(nu):
        nu = mpmath.mpf(nu)
        total = mpmath.mpf(0)
        for lo, hi, dens in pieces:
            q = lambda x: mpmath.exp(-abs(x - nu) / 4) / 8  # noqa: E731
            pts = [lo, nu, hi] if lo < nu < hi else [lo, hi]
            total += dens**a * mpmath.quad(lambda x: q(x) ** (1 - a), pts)
        return (total - 1) / (a * (a - 1))

    spec, p, fam = CASES["4.2"].build()
    for nu in (0.0, 0.01, 4.15):
        assert float(divergence_full(spec, p, fam, nu)) == pytest.approx(float(oracle(nu)), abs=1e-10)
    assert oracle(0.01) > oracle(0) and oracle(-0.01) > oracle(0)
    assert oracle(4.15) < oracle(0)
