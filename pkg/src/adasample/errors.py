"""Exception types raised across the package."""


class AdaSampleError(Exception):
    """Base class for all package errors."""


class VarianceUndefinedError(AdaSampleError, ValueError):
    """Sample variance requested on fewer than two per-sample gradients."""


class DegeneratePivotError(AdaSampleError, ValueError):
    """Pivot direction (or full gradient) has zero norm."""


class LineSearchError(AdaSampleError, RuntimeError):
    """Backtracking exceeded its cap without sufficient decrease."""

    def __init__(self, message, last_l):
        super().__init__(message)
        self.last_l = last_l


class DivergenceError(AdaSampleError, RuntimeError):
    """Iterate or sampled objective blew past the divergence guard."""


class IterationLimitError(AdaSampleError, RuntimeError):
    pass


class LibsvmParseError(AdaSampleError, ValueError):
    def __init__(self, message, lineno):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno
