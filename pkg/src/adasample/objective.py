"""Finite-sum objectives: per-sample values and gradients plus batch aggregates.

Two objectives are provided.  ``LogisticL2`` is the l2-regularized logistic
loss used for the benchmarks, with labels ``z_i`` in {-1, +1} and feature rows
``y_i``::

    F_i(x) = log(1 + exp(-z_i * x.y_i)) + lam/2 * ||x||^2

``MeanSquareCenters`` is the quadratic ``F_i(x) = ||x - c_i||^2 / 2`` whose
Hessian is the identity, handy when exact curvature constants are needed.
"""

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy import sparse

from . import _kernels
from .errors import AdaSampleError


@dataclass(frozen=True)
class Dataset:
    """N labelled feature rows; ``features`` is a dense array or CSR matrix."""

    features: Union[np.ndarray, sparse.csr_matrix]
    labels: np.ndarray

    def __post_init__(self):
        X = self.features
        if sparse.issparse(X):
            X = sparse.csr_matrix(X, dtype=np.float64)
            X.sort_indices()
            values = X.data
            if X.nnz and (X.indices.min() < 0 or X.indices.max() >= X.shape[1]):
                raise ValueError("sparse column index out of range")
        else:
            X = np.ascontiguousarray(X, dtype=np.float64)
            if X.ndim != 2:
                raise ValueError("features must be a 2-D array")
            values = X
        z = np.ascontiguousarray(self.labels, dtype=np.float64).ravel()
        if X.shape[0] < 1 or X.shape[1] < 1:
            raise ValueError("dataset needs N >= 1 and d >= 1")
        if z.shape[0] != X.shape[0]:
            raise ValueError(f"{z.shape[0]} labels for {X.shape[0]} rows")
        if not np.all(np.isfinite(values)):
            raise ValueError("features contain NaN or infinite values")
        if not np.all((z == 1.0) | (z == -1.0)):
            raise ValueError("labels must be -1 or +1")
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", z)

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def is_sparse(self) -> bool:
        return sparse.issparse(self.features)

    def dense(self) -> "Dataset":
        if not self.is_sparse:
            return self
        return Dataset(self.features.toarray(), self.labels)

    def sparse(self) -> "Dataset":
        if self.is_sparse:
            return self
        return Dataset(sparse.csr_matrix(self.features), self.labels)


@dataclass(frozen=True)
class LogisticL2:
    """Logistic loss with ridge term; ``lam=None`` means 1/N."""

    lam: Optional[float] = None

    def __post_init__(self):
        if self.lam is not None and not self.lam >= 0:
            raise ValueError("lam must be nonnegative")

    def resolve_lam(self, dataset: Dataset) -> float:
        return 1.0 / dataset.n_samples if self.lam is None else float(self.lam)


@dataclass(frozen=True, eq=False)
class MeanSquareCenters:
    """Quadratic test problem with mu = L = 1; minimizer is the mean center."""

    centers: np.ndarray

    def __post_init__(self):
        c = np.ascontiguousarray(self.centers, dtype=np.float64)
        if c.ndim != 2 or not np.all(np.isfinite(c)):
            raise ValueError("centers must be a finite N x d array")
        object.__setattr__(self, "centers", c)

    @classmethod
    def from_dataset(cls, dataset: Dataset) -> "MeanSquareCenters":
        X = dataset.features
        return cls(X.toarray() if sparse.issparse(X) else X)

    def minimizer(self) -> np.ndarray:
        return _kernels.row_mean(self.centers)


ObjectiveSpec = Union[LogisticL2, MeanSquareCenters]


def centers_dataset(centers) -> Dataset:
    """Dataset whose rows are the centers (labels are placeholders)."""
    c = np.asarray(centers, dtype=np.float64)
    return Dataset(c, np.ones(c.shape[0]))


@dataclass
class GradientBundle:
    """Per-sample gradients of a batch in the order of ``indices``."""

    indices: np.ndarray
    per_sample: np.ndarray
    batch_mean: np.ndarray = field(default=None)
    values: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.batch_mean is None:
            self.batch_mean = _kernels.row_mean(self.per_sample)

    @property
    def size(self) -> int:
        return self.per_sample.shape[0]


def _check_x(x, dataset):
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.shape != (dataset.n_features,):
        raise ValueError(f"x has shape {x.shape}, expected ({dataset.n_features},)")
    if not np.all(np.isfinite(x)):
        raise ValueError("x contains NaN or infinite entries")
    return x


def _check_indices(S, dataset):
    idx = np.ascontiguousarray(S, dtype=np.int64).ravel()
    if idx.size == 0:
        raise ValueError("empty index set")
    if idx.min() < 0 or idx.max() >= dataset.n_samples:
        raise IndexError("sample index out of range")
    return idx


def _terms(spec, dataset, x, idx, want_grad):
    if isinstance(spec, LogisticL2):
        lam = spec.resolve_lam(dataset)
        X = dataset.features
        if dataset.is_sparse:
            return _kernels.logistic_csr(X, dataset.labels, idx, x, lam, want_grad)
        return _kernels.logistic_dense(X, dataset.labels, idx, x, lam, want_grad)
    if isinstance(spec, MeanSquareCenters):
        if spec.centers.shape[0] != dataset.n_samples:
            raise AdaSampleError("centers and dataset disagree on N")
        diff = x - spec.centers[idx]
        values = 0.5 * np.einsum("ij,ij->i", diff, diff)
        return values, (diff if want_grad else None)
    raise TypeError(f"unknown objective {spec!r}")


def per_sample_value(spec, dataset, x, i) -> float:
    x = _check_x(x, dataset)
    idx = _check_indices([i], dataset)
    return float(_terms(spec, dataset, x, idx, False)[0][0])


def per_sample_gradient(spec, dataset, x, i) -> np.ndarray:
    x = _check_x(x, dataset)
    idx = _check_indices([i], dataset)
    return _terms(spec, dataset, x, idx, True)[1][0]


def batch_value(spec, dataset, x, S) -> float:
    """Mean of the per-sample values over the index set ``S``."""
    x = _check_x(x, dataset)
    idx = _check_indices(S, dataset)
    values = _terms(spec, dataset, x, idx, False)[0]
    return float(_kernels.row_mean(values[:, None])[0])


def batch_gradient(spec, dataset, x, S) -> GradientBundle:
    """Per-sample gradients over ``S`` plus their mean; values ride along."""
    x = _check_x(x, dataset)
    idx = _check_indices(S, dataset)
    values, grads = _terms(spec, dataset, x, idx, True)
    return GradientBundle(indices=idx, per_sample=grads, values=values)


def full_value(spec, dataset, x) -> float:
    return batch_value(spec, dataset, x, np.arange(dataset.n_samples))


def full_gradient(spec, dataset, x) -> np.ndarray:
    return batch_gradient(spec, dataset, x, np.arange(dataset.n_samples)).batch_mean


def finite_difference_check(spec, dataset, x, h=1e-6) -> float:
    """Max over coordinates of |central difference - analytic| / (1 + |analytic|)."""
    if not h > 0:
        raise ValueError("h must be positive")
    x = _check_x(x, dataset)
    g = full_gradient(spec, dataset, x)
    worst = 0.0
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        fd = (full_value(spec, dataset, x + e) - full_value(spec, dataset, x - e)) / (2 * h)
        worst = max(worst, abs(fd - g[j]) / (1.0 + abs(g[j])))
    return worst
