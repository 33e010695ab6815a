"""Adaptive sample-size gradient methods for finite-sum problems."""

from .batchstats import BatchStats, compute_batch_stats, population_stats
from .control import ControlConfig, ControlState, TestKind, controller_step, gamma_from
from .errors import (
    AdaSampleError,
    DegeneratePivotError,
    DivergenceError,
    LibsvmParseError,
    LineSearchError,
    VarianceUndefinedError,
)
from .linesearch import LineSearchConfig, backtrack, contraction_factor
from .objective import (
    Dataset,
    GradientBundle,
    LogisticL2,
    MeanSquareCenters,
    batch_gradient,
    batch_value,
    full_gradient,
    full_value,
)
from .optimizer import RunConfig, RunResult, TraceRecord, run
from .rng import RngStream, sample_without_replacement

__version__ = "0.1.0"

__all__ = [
    "AdaSampleError", "BatchStats", "ControlConfig", "ControlState", "Dataset",
    "DegeneratePivotError", "DivergenceError", "GradientBundle", "LibsvmParseError",
    "LineSearchConfig", "LineSearchError", "LogisticL2", "MeanSquareCenters", "RngStream",
    "RunConfig", "RunResult", "TestKind", "TraceRecord", "VarianceUndefinedError",
    "backtrack", "batch_gradient", "batch_value", "compute_batch_stats", "contraction_factor",
    "controller_step", "full_gradient", "full_value", "gamma_from", "population_stats", "run",
    "sample_without_replacement",
]
