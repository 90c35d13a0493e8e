import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from symvi.cases import CASES
from symvi.errors import Diverged
from symvi.optimizer import OptimizerConfig, Termination, finite_difference_gradient, optimize_location


def _run(name, **kw):
    spec, p, fam = CASES[name].build()
    return optimize_location(spec, p, fam, OptimizerConfig(**kw))


def test_case_1_1_converges_to_mean():
    t = _run("1.1", nu0=5.0, lr=0.5)
    assert t.reason is Termination.CONVERGED
    assert abs(t.final.nu) <= 0.01


def test_case_2_2_repelled_from_local_max():
    t = _run("2.2", nu0=0.1, lr=0.5)
    assert abs(t.final.nu) > 1


def test_start_at_stationary_point():
    t = _run("1.1", nu0=0.0)
    assert t.reason is Termination.CONVERGED and len(t.records) == 1
    assert abs(t.records[0].gradient) <= 1e-8


def test_plateau_warning():
    t = _run("1.2", nu0=2.5, lr=0.5)
    assert t.reason is Termination.CONVERGED
    assert t.final.nu == 2.5
    assert any("plateau" in w for w in t.warnings)


def test_no_plateau_warning_at_strict_minimum():
    assert _run("1.1", nu0=5.0, lr=0.5).warnings == []


def test_diverged():
    with pytest.raises(Diverged) as info:
        _run("1.1", nu0=1.0, lr=100.0)
    assert info.value.trajectory.reason is Termination.DIVERGED


def test_max_iter():
    t = _run("1.1", nu0=5.0, lr=0.01, max_iter=3)
    assert t.reason is Termination.MAX_ITER and len(t.records) == 3
    assert [r.iteration for r in t.records] == [0, 1, 2]


@pytest.mark.parametrize("kwargs", [dict(lr=0.0), dict(h=-1.0), dict(max_iter=0)])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        OptimizerConfig(**kwargs)


@settings(max_examples=20)
@given(st.sampled_from(list(CASES)), st.floats(-10.0, 10.0))
def test_gradient_step_refinement(name, nu):
    spec, p, fam = CASES[name].build()
    g1 = finite_difference_gradient(spec, p, fam, nu, 1e-4)
    g2 = finite_difference_gradient(spec, p, fam, nu, 1e-5)
    assert abs(g1 - g2) <= 1e-4 * max(abs(g1), abs(g2)) + 1e-9


@pytest.mark.parametrize("name", list(CASES))
@pytest.mark.parametrize("nu0", [2.3, -6.1])
def test_monotone_descent(name, nu0):
    t = _run(name, nu0=nu0, lr=0.05, max_iter=300)
    d = t.values()
    assert np.all(np.diff(d) <= 1e-12 * np.abs(d[1:]))


@pytest.mark.parametrize("name", list(CASES))
def test_mirrored_starts(name):
    a = _run(name, nu0=1.7, lr=0.05, max_iter=200)
    b = _run(name, nu0=-1.7, lr=0.05, max_iter=200)
    assert len(a.records) == len(b.records)
    assert np.allclose(a.nu(), -b.nu(), rtol=0, atol=1e-8)
    assert np.allclose(a.values(), b.values(), rtol=0, atol=1e-8)
