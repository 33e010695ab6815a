import math

import numpy as np
import pytest

from adasample import (
    ControlConfig,
    LineSearchConfig,
    LogisticL2,
    MeanSquareCenters,
    RunConfig,
    run,
)
from adasample import TestKind as Kind
from adasample.errors import DivergenceError
from adasample.objective import centers_dataset
from adasample.optimizer import effective_evals_increment
from adasample.harness.data import gen_synthetic
from adasample.oracle import reference_optimum


@pytest.fixture(scope="module")
def synth():
    ds = gen_synthetic(600, 8, 0.1, 0)
    return ds, reference_optimum(LogisticL2(), ds)[1]


def test_effective_evals():
    assert effective_evals_increment("gradient", 10, 10) == 1.0
    assert effective_evals_increment("function", 5, 10) == 0.5
    assert effective_evals_increment("function", 128, 8124) == 128 / 8124
    with pytest.raises(ValueError):
        effective_evals_increment("hessian", 1, 2)
    with pytest.raises(ValueError):
        effective_evals_increment("gradient", 3, 2)


def test_identical_centers_one_step():
    c = np.tile([[2.0, -1.0]], (6, 1))
    res = run(MeanSquareCenters(c), centers_dataset(c), RunConfig(alpha=1.0))
    assert res.reason == "tolerance" and len(res.trace) == 1
    np.testing.assert_array_equal(res.x, [2.0, -1.0])


def test_config_validation():
    with pytest.raises(ValueError):
        RunConfig()
    with pytest.raises(ValueError):
        RunConfig(alpha=1.0, linesearch=LineSearchConfig())
    with pytest.raises(ValueError):
        RunConfig(alpha=-1.0)


@pytest.mark.parametrize("kind", [Kind.AUGMENTED, Kind.NORM])
def test_trace_invariants(synth, kind):
    ds, rstar = synth
    cfg = RunConfig(control=ControlConfig(test_kind=kind), linesearch=LineSearchConfig(),
                    max_epochs=20, seed=3)
    res = run(LogisticL2(), ds, cfg, r_star=rstar)
    sizes = [r.sample_size for r in res.trace]
    assert all(a <= b for a, b in zip(sizes, sizes[1:])) and sizes[-1] <= 600
    assert all(r.f_error >= -1e-10 for r in res.trace)
    evals = [r.eff_evals for r in res.trace]
    assert evals[0] == 0 and all(a < b for a, b in zip(evals, evals[1:]))
    # each iteration costs one gradient and (backtracks + 2) function evaluations
    for a, b in zip(res.trace, res.trace[1:]):
        assert b.eff_evals - a.eff_evals == pytest.approx((a.backtracks + 3) * a.sample_size / 600)
    assert all(r.l_k >= 0 and r.alpha == pytest.approx(1 / r.l_k) for r in res.trace)
    assert res.reason in ("tolerance", "budget")


def test_l_never_below_half(synth):
    ds, rstar = synth
    res = run(LogisticL2(), ds, RunConfig(linesearch=LineSearchConfig(), max_epochs=10), r_star=rstar)
    ls = [1.0] + [r.l_k for r in res.trace]
    assert all(b >= a / 2 * (1 - 1e-15) for a, b in zip(ls, ls[1:]))


def test_determinism(synth):
    ds, rstar = synth
    cfg = RunConfig(linesearch=LineSearchConfig(), max_epochs=5, seed=11)
    a = run(LogisticL2(), ds, cfg, r_star=rstar)
    b = run(LogisticL2(), ds, cfg, r_star=rstar)
    assert a.trace == b.trace or all(
        repr(x) == repr(y) for x, y in zip(a.trace, b.trace))
    np.testing.assert_array_equal(a.x, b.x)


def test_seeds_differ(synth):
    ds, rstar = synth
    runs = [run(LogisticL2(), ds, RunConfig(alpha=1.0, max_epochs=2, seed=s), r_star=rstar) for s in (0, 1)]
    assert not np.array_equal(runs[0].x, runs[1].x)


def test_fixed_step_reaches_tolerance():
    c = np.random.default_rng(0).standard_normal((50, 3))
    cfg = RunConfig(alpha=0.5, max_epochs=1000, control=ControlConfig(theta=0.5))
    res = run(MeanSquareCenters(c), centers_dataset(c), cfg)
    assert res.reason == "tolerance" and res.grad_inf <= 1e-6


def test_full_batch_is_gradient_descent():
    c = np.random.default_rng(1).standard_normal((20, 2))
    spec, ds = MeanSquareCenters(c), centers_dataset(c)
    cfg = RunConfig(alpha=0.5, control=ControlConfig(s0=20), record_iterates=True, max_epochs=30)
    res = run(spec, ds, cfg)
    mean = c.mean(axis=0)
    for k, m, x in res.iterates:
        np.testing.assert_allclose(x, mean + 0.5**k * (0 - mean), atol=1e-13)
        assert m == 20


def test_norm_pass_implies_inner_product_pass(synth):
    ds, rstar = synth
    res = run(LogisticL2(), ds, RunConfig(alpha=2.0, max_epochs=5, seed=2), r_star=rstar)
    for r in res.trace:
        if r.norm_lhs <= r.norm_rhs:
            assert r.ip_lhs <= r.ip_rhs


def test_first_increase_norm_no_later():
    ds = gen_synthetic(400, 6, 0.2, 5)
    rstar = reference_optimum(LogisticL2(), ds)[1]
    first = {}
    for kind in (Kind.AUGMENTED, Kind.NORM):
        res = run(LogisticL2(), ds, RunConfig(alpha=1.0, max_epochs=3, seed=0,
                                              control=ControlConfig(test_kind=kind)), r_star=rstar)
        first[kind] = next((r.k for r in res.trace if r.sample_size > 2), math.inf)
    assert first[Kind.NORM] <= first[Kind.AUGMENTED]


def test_divergence():
    ds = gen_synthetic(200, 5, 0.0, 1)
    with pytest.raises(DivergenceError):
        run(LogisticL2(), ds, RunConfig(alpha=1e8, max_epochs=50), r_star=0.0)


def test_exact_mode_sizes(four_centers):
    spec, ds = four_centers
    cfg = RunConfig(alpha=0.1, control=ControlConfig(exact=True, test_kind=Kind.NORM), max_epochs=3,
                    x0=np.array([1.0, 0.0]))
    res = run(spec, ds, cfg)
    # at (1, 0) the exact norm test needs ceil(2.5 / 0.81) = 4 samples
    assert res.trace[0].sample_size == 4 and res.trace[0].branch == "exact"


def test_diagnostics_every(synth):
    ds, rstar = synth
    res = run(LogisticL2(), ds, RunConfig(alpha=1.0, max_epochs=1, diagnostics_every=5), r_star=rstar)
    assert all(math.isnan(r.f_error) == (r.k % 5 != 0) for r in res.trace)
    assert math.isfinite(res.f_error)
