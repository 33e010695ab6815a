"""Population-level diagnostics computed with access to the full dataset.

These quantities are what the practical tests try to approximate from a
batch: the exact tests, the variance ratio ``beta`` between the directional
and the total gradient variance, the angle between a sampled and the true
gradient, and the reference optimum used for function-error traces.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import svds

from . import _kernels
from .batchstats import BatchStats, population_stats
from .errors import DegeneratePivotError, IterationLimitError
from .objective import (
    MeanSquareCenters,
    batch_gradient,
    full_gradient,
    full_value,
)
from .rng import RngStream, sample_without_replacement


@dataclass(frozen=True)
class ExactTests:
    sample_size: int
    ip_lhs: float
    ip_rhs: float
    orth_lhs: float
    orth_rhs: float
    norm_lhs: float
    norm_rhs: float

    @property
    def ip_passed(self):
        return self.ip_lhs <= self.ip_rhs

    @property
    def orth_passed(self):
        return self.orth_lhs <= self.orth_rhs

    @property
    def norm_passed(self):
        return self.norm_lhs <= self.norm_rhs


@dataclass(frozen=True)
class OracleReport:
    beta: float
    s_min_inner: float
    s_min_norm: float
    angle_deg: float
    exact_ip_lhs: float
    exact_orth_lhs: float
    exact_norm_lhs: float
    rho: float
    tan_bound: float


def exact_tests_from_stats(stats: BatchStats, theta, nu, sample_size) -> ExactTests:
    g2 = stats.pivot_norm_sq
    return ExactTests(
        sample_size=sample_size,
        ip_lhs=stats.var_inner / sample_size,
        ip_rhs=theta**2 * g2**2,
        orth_lhs=stats.var_orth / sample_size,
        orth_rhs=nu**2 * g2,
        norm_lhs=stats.var_grad / sample_size,
        norm_rhs=theta**2 * g2,
    )


def exact_tests(spec, dataset, x, theta, nu, sample_size) -> ExactTests:
    """Exact-variance tests at ``x`` for a batch of ``sample_size``."""
    return exact_tests_from_stats(population_stats(spec, dataset, x), theta, nu, sample_size)


def beta_from_stats(stats: BatchStats, theta):
    """(beta, minimal inner-product size, minimal norm-test size), real valued."""
    g2 = stats.pivot_norm_sq
    s_inner = stats.var_inner / (theta**2 * g2**2)
    s_norm = stats.var_grad / (theta**2 * g2)
    denom = stats.var_grad * g2
    beta = stats.var_inner / denom if denom > 0 else 1.0
    return beta, s_inner, s_norm


def beta_and_min_sizes(spec, dataset, x, theta):
    return beta_from_stats(population_stats(spec, dataset, x), theta)


def exact_min_size(stats: BatchStats, theta, nu, norm=False) -> int:
    """Smallest integer batch size passing the exact tests (at least 1)."""
    g2 = stats.pivot_norm_sq
    if norm:
        raw = stats.var_grad / (theta**2 * g2)
    else:
        raw = max(stats.var_inner / (theta**2 * g2**2), stats.var_orth / (nu**2 * g2))
    return max(1, math.ceil(raw))


def angle_degrees(g, h) -> float:
    g = np.asarray(g, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    ng, nh = np.linalg.norm(g), np.linalg.norm(h)
    if ng == 0 or nh == 0:
        raise DegeneratePivotError("angle undefined for a zero vector")
    # atan2 of the rejection keeps small angles accurate where acos would not
    dot = float(g @ h)
    rej = np.linalg.norm(g - (dot / float(h @ h)) * h)
    return math.degrees(math.atan2(rej * nh, dot))


def theoretical_rate(theta, nu, mu, l) -> float:
    """Linear rate ``1 - mu / (L (1 + theta^2 + nu^2))`` at the largest safe step."""
    if not 0 < mu <= l:
        raise ValueError("need 0 < mu <= L")
    return 1.0 - mu / (l * (1.0 + theta**2 + nu**2))


def tan_bound(theta, nu) -> float:
    """Typical bound on tan(angle(sampled, true gradient)) under both tests."""
    if not 0 <= theta < 1:
        raise ValueError("theta must lie in [0, 1)")
    return nu / math.sqrt(1.0 - theta**2)


def curvature_bounds(spec, dataset):
    """(mu, L) bounds on the Hessian of the empirical risk."""
    if isinstance(spec, MeanSquareCenters):
        return 1.0, 1.0
    lam = spec.resolve_lam(dataset)
    X = dataset.features
    if sparse.issparse(X) and min(X.shape) > 1:
        smax = float(svds(X, k=1, return_singular_vectors=False, random_state=0)[0])
    else:
        smax = float(np.linalg.norm(X.toarray() if sparse.issparse(X) else X, 2))
    return lam, lam + smax**2 / (4.0 * dataset.n_samples)


def descent_probability(spec, dataset, x, sample_size, trials=10000, rng=None) -> float:
    """Fraction of batches of ``sample_size`` whose mean gradient is a descent direction.

    When there are no more distinct batches than ``trials`` every batch is
    enumerated once and the exact fraction is returned.
    """
    if trials < 1000:
        raise ValueError("use at least 1000 trials")
    n = dataset.n_samples
    full = batch_gradient(spec, dataset, x, np.arange(n))
    g = full.batch_mean
    if not float(g @ g) > 0:
        raise DegeneratePivotError("zero full gradient")
    if not 1 <= sample_size <= n:
        raise ValueError("sample_size must lie in [1, N]")
    s = full.per_sample @ g
    if math.comb(n, sample_size) <= trials:
        hits = total = 0
        for combo in itertools.combinations(range(n), sample_size):
            hits += s[list(combo)].mean() > 0
            total += 1
        return hits / total
    if rng is None:
        rng = RngStream(0)
    gen = rng.generator if isinstance(rng, RngStream) else rng
    hits = 0
    for _ in range(trials):
        idx = sample_without_replacement(gen, n, sample_size)
        hits += s[idx].mean() > 0
    return hits / trials


def _risk_and_gradient(X, z, lam, x):
    # matrix-vector form of the full logistic risk; per-sample terms are not needed here
    t = z * (X @ x)
    value = float(np.mean(np.logaddexp(0.0, -t))) + 0.5 * lam * float(x @ x)
    w = -z * np.exp(-np.logaddexp(0.0, t))
    grad = np.asarray(X.T @ w).ravel() / X.shape[0] + lam * x
    return value, grad


def reference_optimum(spec, dataset, tol=1e-8, max_iter=1_000_000, x0=None):
    """(x*, R*) with ||grad R(x*)||_inf <= tol.

    The quadratic problem is solved in closed form; otherwise full-batch
    gradient descent with the backtracking rule (contraction 2, growth 2).
    The returned R* is re-evaluated with the per-sample kernels so traces
    measure the error against the same arithmetic they use for R(x_k).
    """
    if isinstance(spec, MeanSquareCenters):
        x = spec.minimizer()
        return x, full_value(spec, dataset, x)
    X, z = dataset.features, dataset.labels
    lam = spec.resolve_lam(dataset)
    x = np.zeros(dataset.n_features) if x0 is None else np.array(x0, dtype=np.float64)
    f, g = _risk_and_gradient(X, z, lam, x)
    L = 1.0
    # half the tolerance leaves room for rounding differences against the kernels
    for _ in range(int(max_iter)):
        if np.max(np.abs(g)) <= 0.5 * tol:
            break
        gnsq = float(g @ g)
        L /= 2.0
        while True:
            trial = x - g / L
            f_new, g_new = _risk_and_gradient(X, z, lam, trial)
            if f_new <= f - gnsq / (2.0 * L):
                break
            L *= 2.0
        x, f, g = trial, f_new, g_new
    else:
        raise IterationLimitError(f"reference optimum not reached in {max_iter} iterations")
    full = batch_gradient(spec, dataset, x, np.arange(dataset.n_samples))
    return x, float(_kernels.row_mean(full.values[:, None])[0])


def oracle_report(spec, dataset, x, theta, nu, sample_size, sampled_gradient=None,
                  mu=None, l=None) -> OracleReport:
    stats = population_stats(spec, dataset, x)
    beta, s_inner, s_norm = beta_from_stats(stats, theta)
    ex = exact_tests_from_stats(stats, theta, nu, sample_size)
    angle = float("nan")
    if sampled_gradient is not None and np.any(sampled_gradient):
        angle = angle_degrees(sampled_gradient, full_gradient(spec, dataset, x))
    rho = float("nan")
    if mu is not None and l is not None:
        rho = theoretical_rate(theta, nu, mu, l)
    tb = tan_bound(theta, nu) if theta < 1 else float("inf")
    return OracleReport(beta, s_inner, s_norm, angle, ex.ip_lhs, ex.orth_lhs,
                        ex.norm_lhs, rho, tb)
