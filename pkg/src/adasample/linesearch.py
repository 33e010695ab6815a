"""Backtracking line search on the sampled objective with a variance-aware reset."""

from dataclasses import dataclass

import numpy as np

from .batchstats import BatchStats
from .errors import DegeneratePivotError, LineSearchError
from .objective import batch_value


@dataclass
class LineSearchConfig:
    l0: float = 1.0
    eta: float = 1.5
    max_backtracks: int = 60

    def __post_init__(self):
        if not self.l0 > 0:
            raise ValueError("l0 must be positive")
        if not self.eta > 1:
            raise ValueError("eta must exceed 1")
        if self.max_backtracks < 0:
            raise ValueError("max_backtracks must be nonnegative")


@dataclass(frozen=True)
class LineSearchResult:
    l_k: float
    zeta_k: float
    backtracks: int
    function_evals: int
    f_start: float
    f_new: float

    @property
    def alpha_k(self) -> float:
        return 1.0 / self.l_k


def contraction_factor(stats: BatchStats) -> float:
    """How far to shrink the previous Lipschitz estimate, in [1, 2].

    With ``a = var_grad / (|S| ||g||^2) + 1`` the factor is ``max(1, 2/a)``:
    a noise-free batch halves the estimate, a noisy one leaves it alone.
    """
    if not stats.pivot_norm_sq > 0:
        raise DegeneratePivotError("zero batch gradient")
    a = stats.var_grad / (stats.sample_size * stats.pivot_norm_sq) + 1.0
    return max(1.0, 2.0 / a)


def backtrack(spec, dataset, x, bundle, S, l_prev, config: LineSearchConfig,
              zeta=None, f_start=None) -> LineSearchResult:
    """Smallest ``L = (l_prev/zeta) * eta**j`` giving sufficient decrease on ``S``.

    ``zeta`` is normally :func:`contraction_factor` of the current batch; it
    defaults to 2 (the noise-free value) when not given.  ``f_start`` skips
    the evaluation of F_S(x) when the caller already has it, but the
    evaluation is still counted in ``function_evals``.
    """
    if not l_prev > 0:
        raise ValueError("l_prev must be positive")
    if zeta is None:
        zeta = 2.0
    g = bundle.batch_mean
    gnsq = float(g @ g)
    if f_start is None:
        f_start = batch_value(spec, dataset, x, S)
    L = l_prev / zeta
    for j in range(config.max_backtracks + 1):
        trial = x - g / L
        f_new = batch_value(spec, dataset, trial, S) if np.all(np.isfinite(trial)) else np.inf
        if np.isfinite(f_new) and f_new <= f_start - gnsq / (2.0 * L):
            return LineSearchResult(L, zeta, j, j + 2, f_start, f_new)
        if j < config.max_backtracks:
            L *= config.eta
    raise LineSearchError(
        f"no sufficient decrease after {config.max_backtracks} backtracks", L
    )
