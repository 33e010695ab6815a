"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run directly for a compact report:

    python3 tests/test_acceptance.py

Under pytest the same lines are printed (capture is bypassed for them).
Runtime budgets are part of each criterion and are checked as well.
"""

import math
import sys
import time

import numpy as np
from scipy import sparse

from adasample import (
    ControlConfig,
    Dataset,
    LineSearchConfig,
    LogisticL2,
    MeanSquareCenters,
    RunConfig,
    backtrack,
    compute_batch_stats,
    contraction_factor,
    population_stats,
    run,
)
from adasample.harness import cli
from adasample.harness.data import gen_synthetic, parse_libsvm, write_libsvm
from adasample.harness.traces import read_trace
from adasample.objective import batch_gradient, batch_value, centers_dataset, finite_difference_check
from adasample.oracle import (
    beta_and_min_sizes,
    descent_probability,
    reference_optimum,
    theoretical_rate,
)
from adasample.rng import RngStream
from oracles import FOUR_CENTERS, random_logistic

_REPORT = {}


def report(num, ok, detail, elapsed, budget, capsys=None):
    within = elapsed < budget
    line = (f"criterion {num:>2}: {'PASS' if ok and within else 'FAIL'}  {detail}  "
            f"[{elapsed:.2f}s / {budget:g}s]")
    _REPORT[num] = line
    if capsys is not None:
        with capsys.disabled():
            print("\n" + line)
    else:
        print(line)
    return ok and within


def _timer():
    t0 = time.perf_counter()
    return lambda: time.perf_counter() - t0


def synthetic_problem():
    ds = gen_synthetic(7000, 50, 0.1, 0)
    return ds, reference_optimum(LogisticL2(), ds)[1]


def libsvm_fixture(path):
    """Mushrooms-scale binary-feature data (8124 x 112), written and parsed as LIBSVM."""
    g = np.random.default_rng(2024)
    X = (g.random((8124, 112)) < 0.2).astype(float)
    w = g.standard_normal(112)
    t = X @ w
    z = np.where(t >= np.median(t), 1.0, -1.0)
    z[g.random(8124) < 0.1] *= -1
    write_libsvm(Dataset(sparse.csr_matrix(X), z), path)
    return parse_libsvm(path, n_features=112)


# 1 ------------------------------------------------------------------------

def test_c01_oracle_equivalence(capsys):
    elapsed = _timer()
    ds = random_logistic(100, 5, seed=101)
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(20):
        x = rng.standard_normal(5) * 2
        full = batch_gradient(LogisticL2(), ds, x, np.arange(100))
        samp = compute_batch_stats(full, pivot=full.batch_mean)
        pop = population_stats(LogisticL2(), ds, x)
        for a, b in ((samp.var_inner, pop.var_inner), (samp.var_orth, pop.var_orth),
                     (samp.var_grad, pop.var_grad)):
            worst = max(worst, abs(a * 99 / 100 - b) / abs(b))
    ok = report(1, worst <= 1e-10, f"max relative gap {worst:.2e} (tol 1e-10)", elapsed(), 1, capsys)
    assert ok


# 2 ------------------------------------------------------------------------

def test_c02_beta_bound(capsys):
    elapsed = _timer()
    worst = -math.inf
    for seed in range(5):
        ds = random_logistic(200, 8, seed=200 + seed)
        rng = np.random.default_rng(seed)
        for _ in range(100):
            worst = max(worst, beta_and_min_sizes(LogisticL2(), ds, rng.standard_normal(8) * 3, 0.9)[0])
    spec, ds = MeanSquareCenters(FOUR_CENTERS), centers_dataset(FOUR_CENTERS)
    beta, si, sn = beta_and_min_sizes(spec, ds, np.array([1.0, 0.0]), 0.9)
    ok = (worst <= 1 + 1e-12 and abs(beta - 0.2) <= 1e-12
          and abs(si - 0.6173) <= 1e-3 and abs(sn - 3.0864) <= 1e-3)
    ok = report(2, ok, f"max beta {worst:.6f}; fixture beta={beta:.15f} |S_i|={si:.4f} |S_n|={sn:.4f}",
                elapsed(), 1, capsys)
    assert ok


# 3 ------------------------------------------------------------------------

def test_c03_norm_implies_inner_product(capsys):
    elapsed = _timer()
    ds = gen_synthetic(7000, 50, 0.1, 0)
    cfg = RunConfig(linesearch=LineSearchConfig(), max_iterations=500, max_epochs=1e9,
                    tol_grad_inf=1e-300, diagnostics_every=10**6, seed=0)
    res = run(LogisticL2(), ds, cfg, r_star=0.0)
    checked = [r for r in res.trace if math.isfinite(r.norm_lhs)]
    norm_pass = [r for r in checked if r.norm_lhs <= r.norm_rhs]
    violations = sum(r.ip_lhs > r.ip_rhs for r in norm_pass)
    ok = len(res.trace) == 500 and len(checked) == 500 and violations == 0
    ok = report(3, ok, f"{len(checked)} batches, {len(norm_pass)} norm passes, {violations} violations",
                elapsed(), 10, capsys)
    assert ok


# 4 ------------------------------------------------------------------------

def test_c04_linear_rate(capsys):
    elapsed = _timer()
    theta, nu = 0.9, 5.84
    centers = np.random.default_rng(64).standard_normal((64, 5))
    spec, ds = MeanSquareCenters(centers), centers_dataset(centers)
    rho = theoretical_rate(theta, nu, 1.0, 1.0)
    x0 = np.full(5, 4.0)
    errs = []
    for seed in range(50):
        cfg = RunConfig(alpha=1 / (1 + theta**2 + nu**2), seed=seed, x0=x0, max_epochs=1e9,
                        tol_grad_inf=1e-300, max_iterations=201,
                        control=ControlConfig(theta=theta, nu=nu, exact=True))
        errs.append([r.f_error for r in run(spec, ds, cfg).trace])
    mean = np.mean(np.array(errs), axis=0)
    ratio = (mean[200] / mean[10]) ** (1 / 190)
    ok = report(4, ratio <= rho + 0.02,
                f"geometric mean ratio {ratio:.5f} vs rho {rho:.5f} + 0.02", elapsed(), 30, capsys)
    assert ok


# 5 ------------------------------------------------------------------------

def test_c05_descent_probability(capsys):
    elapsed = _timer()
    theta = 0.9
    fixtures = [(MeanSquareCenters(FOUR_CENTERS), centers_dataset(FOUR_CENTERS), np.array([1.0, 0.0]))]
    for seed in range(3):
        ds = random_logistic(2000, 10, seed=500 + seed)
        fixtures.append((LogisticL2(), ds, np.random.default_rng(seed).standard_normal(10)))
    fractions, sizes = [], []
    for i, (spec, ds, x) in enumerate(fixtures):
        s_inner = beta_and_min_sizes(spec, ds, x, theta)[1]
        m = min(max(1, math.ceil(s_inner)), ds.n_samples)
        sizes.append(m)
        fractions.append(descent_probability(spec, ds, x, m, trials=10000, rng=RngStream(i)))
    ok = min(fractions) >= 0.75
    detail = ", ".join(f"|S|={m}: {f:.4f}" for m, f in zip(sizes, fractions))
    ok = report(5, ok, f"descent fractions {detail} (need >= 0.75)", elapsed(), 10, capsys)
    assert ok


# 6 ------------------------------------------------------------------------

def test_c06_end_to_end(capsys):
    import tempfile
    elapsed = _timer()
    cfg = RunConfig(linesearch=LineSearchConfig(l0=1.0, eta=1.5), seed=0, max_epochs=100, tol_grad_inf=1e-6)
    ds_a, rstar_a = synthetic_problem()
    res_a = run(LogisticL2(), ds_a, cfg, r_star=rstar_a)
    with tempfile.TemporaryDirectory() as tmp:
        ds_b = libsvm_fixture(f"{tmp}/binary_8124x112.svm")
    res_b = run(LogisticL2(), ds_b, cfg)
    ok_a = res_a.reason == "tolerance" and res_a.grad_inf <= 1e-6
    ok_b = res_b.reason == "tolerance" and res_b.grad_inf <= 1e-6
    detail = (f"(a) synthetic: {res_a.reason}, grad_inf {res_a.grad_inf:.2e}, {res_a.eff_evals:.1f} epochs; "
              f"(b) libsvm 8124x112: {res_b.reason}, grad_inf {res_b.grad_inf:.2e}, {res_b.eff_evals:.1f} epochs")
    ok = report(6, ok_a and ok_b, detail, elapsed(), 120, capsys)
    assert ok


# 7 ------------------------------------------------------------------------

def _evals_to(trace, level):
    for r in trace:
        if r["f_error"] <= level:
            return r["eff_evals"]
    return math.inf


def test_c07_inner_product_grows_slower(capsys):
    import tempfile
    elapsed = _timer()
    ordered, sizes_ok, finals_ok, parts = 0, 0, 0, []
    with tempfile.TemporaryDirectory() as tmp:
        for seed in range(5):
            out = f"{tmp}/s{seed}"
            rc = cli.main(["compare", "--synthetic", "7000,50,0.1,0", "--line-search",
                           "--seed", str(seed), "--out", out])
            assert rc == 0
            ip, nt = read_trace(f"{out}/trace_ip.csv"), read_trace(f"{out}/trace_norm.csv")
            e_ip, e_nt = _evals_to(ip, 1e-4), _evals_to(nt, 1e-4)
            ordered += e_ip <= e_nt
            common = min(len(ip), len(nt))
            sizes_ok += all(ip[k]["sample_size"] <= 1.05 * nt[k]["sample_size"] for k in range(common))
            finals_ok += ip[-1]["sample_size"] <= nt[-1]["sample_size"]
            parts.append(f"s{seed} {e_ip:.1f}/{e_nt:.1f}")
    ok = ordered >= 4 and sizes_ok == 5 and finals_ok == 5
    detail = (f"evals to 1e-4 ip/norm: {', '.join(parts)}; ordering {ordered}/5 (need 4), "
              f"per-iteration sizes {sizes_ok}/5, final sizes {finals_ok}/5")
    ok = report(7, ok, detail, elapsed(), 180, capsys)
    assert ok


# 8 ------------------------------------------------------------------------

def test_c08_line_search_contract(capsys):
    elapsed = _timer()
    rng = np.random.default_rng(8)
    ds = random_logistic(300, 6, seed=808)
    spec = LogisticL2()
    bad = 0
    zeta_range = [math.inf, -math.inf]
    for _ in range(1000):
        m = int(rng.integers(2, 60))
        S = np.sort(rng.choice(300, m, replace=False))
        x = rng.standard_normal(6) * rng.exponential(2.0)
        l_prev = float(10.0 ** rng.uniform(-3, 3))
        b = batch_gradient(spec, ds, x, S)
        zeta = contraction_factor(compute_batch_stats(b))
        res = backtrack(spec, ds, x, b, S, l_prev, LineSearchConfig(), zeta=zeta)
        g = b.batch_mean
        f0 = batch_value(spec, ds, x, S)
        f1 = batch_value(spec, ds, x - g / res.l_k, S)
        zeta_range = [min(zeta_range[0], zeta), max(zeta_range[1], zeta)]
        bad += not (f1 <= f0 - (g @ g) / (2 * res.l_k) and res.l_k >= l_prev / 2 and 1 <= zeta <= 2)
    # zero-variance batches: every sample carries the same gradient
    c = np.tile([[1.0, -2.0, 0.5]], (7, 1))
    qs, qd = MeanSquareCenters(c), centers_dataset(c)
    zero_var = contraction_factor(compute_batch_stats(batch_gradient(qs, qd, np.zeros(3), np.arange(7))))
    ok = bad == 0 and zero_var == 2.0
    ok = report(8, ok, f"{bad} violations in 1000 fixtures, zeta in [{zeta_range[0]:.3f}, "
                       f"{zeta_range[1]:.3f}], zero-variance zeta {zero_var}", elapsed(), 5, capsys)
    assert ok


# 9 ------------------------------------------------------------------------

def test_c09_gradient_correctness(capsys):
    elapsed = _timer()
    rng = np.random.default_rng(9)
    ds = random_logistic(40, 5, seed=909)
    c = rng.standard_normal((30, 5))
    worst = 0.0
    for _ in range(50):
        x = rng.standard_normal(5) * 3
        worst = max(worst, finite_difference_check(LogisticL2(), ds, x),
                    finite_difference_check(MeanSquareCenters(c), centers_dataset(c), x))
    ok = report(9, worst <= 1e-5, f"max finite-difference error {worst:.2e} (tol 1e-5)", elapsed(), 1, capsys)
    assert ok


# 10 -----------------------------------------------------------------------

def test_c10_determinism(capsys):
    import tempfile
    elapsed = _timer()
    with tempfile.TemporaryDirectory() as tmp:
        args = ["run", "--synthetic", "7000,50,0.1,0", "--line-search", "--seed", "7"]
        rcs = [cli.main(args + ["--out", f"{tmp}/{tag}"]) for tag in "ab"]
        same = all(open(f"{tmp}/a/{f}", "rb").read() == open(f"{tmp}/b/{f}", "rb").read()
                   for f in ("trace.csv", "iterates.csv"))
    ok = report(10, rcs == [0, 0] and same, f"exit codes {rcs}, byte-identical traces: {same}",
                elapsed(), 30, capsys)
    assert ok


if __name__ == "__main__":
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_c")]
    failures = 0
    for fn in tests:
        try:
            fn(None)
        except AssertionError:
            failures += 1
    sys.exit(1 if failures else 0)
