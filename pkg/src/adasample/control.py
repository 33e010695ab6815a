"""Sample-size control: inner product, orthogonality and norm tests.

The controller runs once per iteration on the batch just used for the step
and returns the sample size for the next iteration.  Sizes only grow.
"""

import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Deque, List, Optional, Tuple

import numpy as np

from . import _kernels
from .batchstats import BatchStats, compute_batch_stats

PIVOT_EPS = 1e-14


class TestKind(str, Enum):
    AUGMENTED = "augmented_inner_product"
    NORM = "norm"


class Branch(str, Enum):
    KEEP = "keep"
    INCREASE = "increase"
    RUNNING_AVERAGE = "running_average"
    DEGENERATE = "degenerate"
    CONVERGED = "converged"
    EXACT = "exact"


def gamma_from(r, omega) -> float:
    """Noisy-regime threshold tied to the window length and inflation factor."""
    if r < 1 or omega < 1:
        raise ValueError("need r >= 1 and omega >= 1")
    root = 1.0 / math.sqrt(r)
    return root + (1.0 - root) / omega


@dataclass
class ControlConfig:
    theta: float = 0.9
    nu: float = 5.84
    r: int = 10
    omega: float = 10.0
    gamma: Optional[float] = None
    s0: int = 2
    test_kind: TestKind = TestKind.AUGMENTED
    # pick |S_k| from population statistics at x_k (verification runs only)
    exact: bool = False

    def __post_init__(self):
        self.test_kind = TestKind(self.test_kind)
        if self.gamma is None:
            self.gamma = gamma_from(self.r, self.omega)
        if not self.theta > 0 or not self.nu > 0:
            raise ValueError("theta and nu must be positive")
        if self.r < 1 or self.omega < 1:
            raise ValueError("need r >= 1 and omega >= 1")
        if not 0 < self.gamma < 1 and not (self.gamma == 1 and self.r == 1):
            raise ValueError("gamma must lie in (0, 1)")
        if self.s0 < 2:
            raise ValueError("s0 must be at least 2")

    def validate_for(self, n_samples):
        if self.s0 > n_samples:
            raise ValueError(f"s0={self.s0} exceeds N={n_samples}")


@dataclass
class ControlState:
    current_size: int
    r: int
    recent_gradients: Deque[Tuple[int, np.ndarray]] = None
    stagnation_count: int = 0
    iteration: int = 0

    def __post_init__(self):
        if self.recent_gradients is None:
            self.recent_gradients = deque(maxlen=self.r)

    @classmethod
    def initial(cls, config: ControlConfig) -> "ControlState":
        return cls(current_size=config.s0, r=config.r)

    def copy(self) -> "ControlState":
        return ControlState(
            current_size=self.current_size,
            r=self.r,
            recent_gradients=deque(self.recent_gradients, maxlen=self.r),
            stagnation_count=self.stagnation_count,
            iteration=self.iteration,
        )


@dataclass(frozen=True)
class TestOutcome:
    which: str
    lhs: float
    rhs: float

    @property
    def passed(self) -> bool:
        return self.lhs <= self.rhs


@dataclass
class Decision:
    new_size: int
    branch: Branch
    tests_run: List[TestOutcome] = field(default_factory=list)
    used_running_average: bool = False
    stats: Optional[BatchStats] = None

    @property
    def converged(self) -> bool:
        return self.branch is Branch.CONVERGED


def inner_product_test(stats: BatchStats, theta) -> TestOutcome:
    return TestOutcome(
        "inner_product",
        stats.var_inner / stats.sample_size,
        theta**2 * stats.pivot_norm_sq**2,
    )


def orthogonality_test(stats: BatchStats, nu) -> TestOutcome:
    return TestOutcome(
        "orthogonality",
        stats.var_orth / stats.sample_size,
        nu**2 * stats.pivot_norm_sq,
    )


def norm_test(stats: BatchStats, theta) -> TestOutcome:
    return TestOutcome(
        "norm",
        stats.var_grad / stats.sample_size,
        theta**2 * stats.pivot_norm_sq,
    )


def _clamp(raw, current, n):
    # NaN/inf raw sizes fall through to the floor/ceiling
    target = current + 1
    if np.isfinite(raw):
        target = max(target, math.ceil(raw))
    elif raw > 0:
        target = n
    return int(min(target, n))


def next_sample_size(stats: BatchStats, theta, nu, current, n) -> int:
    """Size predicted to satisfy both tests if the variances stay put."""
    p = stats.pivot_norm_sq
    raw = max(stats.var_inner / (theta**2 * p**2), stats.var_orth / (nu**2 * p))
    return _clamp(raw, current, n)


def next_sample_size_norm(stats: BatchStats, theta, current, n) -> int:
    raw = stats.var_grad / (theta**2 * stats.pivot_norm_sq)
    return _clamp(raw, current, n)


def running_average(state: ControlState) -> Optional[np.ndarray]:
    """Mean of the stored batch gradients, or None until the window is full."""
    if len(state.recent_gradients) < state.r:
        return None
    G = np.stack([g for _, g in state.recent_gradients])
    return _kernels.row_mean(G)


def noisy_regime_check(g_avg, g_batch, gamma) -> bool:
    return bool(np.linalg.norm(g_avg) < gamma * np.linalg.norm(g_batch))


def run_tests(stats: BatchStats, config: ControlConfig) -> List[TestOutcome]:
    if config.test_kind is TestKind.NORM:
        return [norm_test(stats, config.theta)]
    return [inner_product_test(stats, config.theta), orthogonality_test(stats, config.nu)]


def grow(stats: BatchStats, config: ControlConfig, current, n) -> int:
    if config.test_kind is TestKind.NORM:
        return next_sample_size_norm(stats, config.theta, current, n)
    return next_sample_size(stats, config.theta, config.nu, current, n)


def controller_step(state: ControlState, bundle, config: ControlConfig, n) -> Decision:
    """Decide the next sample size from the batch just evaluated.

    Pure in its inputs: ``state`` is not touched; call :func:`apply_decision`
    to advance it.
    """
    current = state.current_size
    g = bundle.batch_mean
    if float(np.sqrt(g @ g)) <= PIVOT_EPS:
        if current >= n:
            return Decision(n, Branch.CONVERGED)
        return Decision(min(2 * current, n), Branch.DEGENERATE)

    stats = compute_batch_stats(bundle)
    tests = run_tests(stats, config)
    if not all(t.passed for t in tests):
        return Decision(grow(stats, config, current, n), Branch.INCREASE, tests, stats=stats)

    # r earlier iterations at this size, plus the current one
    if current < n and len(state.recent_gradients) >= state.r:
        window = state.copy()
        window.recent_gradients.append((state.iteration, g))
        g_avg = running_average(window)
        if noisy_regime_check(g_avg, g, config.gamma) and float(g_avg @ g_avg) > 0:
            avg_stats = compute_batch_stats(bundle, pivot=g_avg)
            avg_tests = run_tests(avg_stats, config)
            tests = tests + avg_tests
            if not all(t.passed for t in avg_tests):
                size = grow(avg_stats, config, current, n)
                return Decision(size, Branch.RUNNING_AVERAGE, tests, True, stats)
            return Decision(current, Branch.KEEP, tests, True, stats)
    return Decision(current, Branch.KEEP, tests, stats=stats)


def apply_decision(state: ControlState, bundle, decision: Decision) -> None:
    """Advance the ring buffer and stagnation counter after a decision."""
    if decision.new_size != state.current_size:
        state.current_size = decision.new_size
        state.recent_gradients.clear()
        state.stagnation_count = 0
    else:
        state.recent_gradients.append((state.iteration, bundle.batch_mean.copy()))
        state.stagnation_count += 1
    state.iteration += 1
