"""Sample and population variances of per-sample gradients about a pivot."""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DegeneratePivotError, VarianceUndefinedError
from .objective import batch_gradient


@dataclass(frozen=True)
class BatchStats:
    """Variances feeding every sample-size test.

    ``var_inner`` is the variance of ``g_i . p`` about its mean, ``var_orth``
    the mean squared norm of the components of ``g_i`` orthogonal to ``p`` and
    ``var_grad`` the total variance of ``g_i`` about the batch mean.  Sample
    statistics divide by ``|S| - 1``; population statistics divide by ``N``.
    """

    sample_size: int
    pivot_norm_sq: float
    var_inner: float
    var_orth: float
    var_grad: float


def _stats(G, pivot, mean, divisor):
    pivot = np.asarray(pivot, dtype=np.float64)
    pnsq = float(pivot @ pivot)
    if not pnsq > 0.0:
        raise DegeneratePivotError("pivot has zero norm")
    _, s_inner, s_orth, s_grad = _kernels.moment_sums(G, pivot, mean)
    return BatchStats(
        sample_size=G.shape[0],
        pivot_norm_sq=pnsq,
        var_inner=s_inner / divisor,
        var_orth=s_orth / divisor,
        var_grad=s_grad / divisor,
    )


def compute_batch_stats(bundle, pivot=None) -> BatchStats:
    """Unbiased sample statistics of ``bundle`` about ``pivot``.

    ``pivot`` defaults to the batch mean, the choice used by the practical
    tests; the running-average safeguard passes its own averaged gradient.
    """
    m = bundle.per_sample.shape[0]
    if m < 2:
        raise VarianceUndefinedError(f"need at least 2 samples, got {m}")
    if pivot is None:
        pivot = bundle.batch_mean
    return _stats(bundle.per_sample, pivot, bundle.batch_mean, m - 1)


def population_stats(spec, dataset, x, pivot=None) -> BatchStats:
    """Divide-by-N moments over the whole dataset; pivot defaults to the full gradient."""
    full = batch_gradient(spec, dataset, x, np.arange(dataset.n_samples))
    return population_stats_from_bundle(full, pivot)


def population_stats_from_bundle(full_bundle, pivot=None) -> BatchStats:
    """Same as :func:`population_stats` for an already evaluated full batch."""
    n = full_bundle.per_sample.shape[0]
    if pivot is None:
        pivot = full_bundle.batch_mean
    return _stats(full_bundle.per_sample, pivot, full_bundle.batch_mean, n)
