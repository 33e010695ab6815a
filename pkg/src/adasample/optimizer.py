"""Outer loops: adaptive sampling with a fixed step or with the line search.

Each iteration draws a fresh batch of the current size (without
replacement), steps along the negative batch gradient, and lets the
controller pick the size of the next batch from the same per-sample
gradients.  Full-dataset diagnostics (true gradient, function error, angle,
beta) are recorded alongside but never charged to the evaluation budget.
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from . import _kernels
from .batchstats import compute_batch_stats, population_stats_from_bundle
from .control import (
    Branch,
    ControlConfig,
    ControlState,
    Decision,
    TestKind,
    apply_decision,
    controller_step,
    inner_product_test,
    norm_test,
    orthogonality_test,
)
from .errors import DegeneratePivotError, DivergenceError
from .linesearch import LineSearchConfig, backtrack, contraction_factor
from .objective import batch_gradient
from .oracle import angle_degrees, beta_from_stats, exact_min_size, reference_optimum
from .rng import SAMPLING, RngStream, sample_without_replacement

DIVERGENCE_LIMIT = 1e100


@dataclass
class RunConfig:
    """Either ``alpha`` (fixed step) or ``linesearch`` must be set, not both."""

    control: ControlConfig = field(default_factory=ControlConfig)
    linesearch: Optional[LineSearchConfig] = None
    alpha: Optional[float] = None
    max_epochs: float = 100.0
    tol_grad_inf: float = 1e-6
    seed: int = 0
    x0: Optional[np.ndarray] = None
    diagnostics_every: int = 1
    rstar_tol: float = 1e-8
    record_iterates: bool = False
    max_iterations: Optional[int] = None

    def __post_init__(self):
        if (self.alpha is None) == (self.linesearch is None):
            raise ValueError("set exactly one of alpha and linesearch")
        if self.alpha is not None and not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not self.tol_grad_inf > 0:
            raise ValueError("tol_grad_inf must be positive")
        if not self.max_epochs > 0:
            raise ValueError("max_epochs must be positive")
        if self.diagnostics_every < 1:
            raise ValueError("diagnostics_every must be at least 1")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")


@dataclass
class TraceRecord:
    k: int
    sample_size: int
    alpha: float
    l_k: float
    eff_evals: float
    f_error: float
    grad_inf: float
    angle_deg: float
    beta: float
    ip_lhs: float
    ip_rhs: float
    orth_lhs: float
    orth_rhs: float
    branch: str
    norm_lhs: float = math.nan
    norm_rhs: float = math.nan
    backtracks: int = 0


@dataclass
class RunResult:
    x: np.ndarray
    trace: List[TraceRecord]
    reason: str
    r_star: float
    f_error: float
    grad_inf: float
    eff_evals: float
    iterates: list = field(default_factory=list)


def effective_evals_increment(kind, batch_size, n) -> float:
    """Cost of one function or gradient evaluation on a batch, in full passes."""
    if kind not in ("gradient", "function"):
        raise ValueError(f"unknown evaluation kind {kind!r}")
    if not 0 <= batch_size <= n:
        raise ValueError("batch_size must lie in [0, N]")
    return batch_size / n


def _mean(values):
    return float(_kernels.row_mean(values[:, None])[0])


def _exact_size(full, state, config, n):
    try:
        stats = population_stats_from_bundle(full)
    except DegeneratePivotError:
        return n
    need = exact_min_size(stats, config.theta, config.nu,
                          norm=config.test_kind is TestKind.NORM)
    return min(max(state.current_size, need), n)


def run(spec, dataset, config: RunConfig, r_star=None) -> RunResult:
    """Minimize the empirical risk; returns final iterate, trace and stop reason.

    Stop reasons: ``tolerance`` (||grad R||_inf <= tol at a diagnostic
    iteration), ``budget`` (effective evaluations reached ``max_epochs``),
    ``converged`` (the full-batch gradient vanished), ``iterations``
    (``max_iterations`` steps taken).
    """
    n = dataset.n_samples
    ctrl = config.control
    ctrl.validate_for(n)
    if r_star is None:
        r_star = reference_optimum(spec, dataset, tol=config.rstar_tol)[1]
    x = np.zeros(dataset.n_features) if config.x0 is None else np.array(config.x0, dtype=np.float64)
    everything = np.arange(n)
    sampler = RngStream(config.seed).substream(SAMPLING)
    state = ControlState.initial(ctrl)
    l_prev = config.linesearch.l0 if config.linesearch else math.nan
    evals = 0.0
    trace = []
    iterates = []
    reason = "budget"
    f_err = g_inf = math.nan

    for k in range(10**9):
        full = None
        if k % config.diagnostics_every == 0 or ctrl.exact:
            full = batch_gradient(spec, dataset, x, everything)
            g_full = full.batch_mean
            f_err = _mean(full.values) - r_star
            g_inf = float(np.max(np.abs(g_full)))
            if g_inf <= config.tol_grad_inf:
                reason = "tolerance"
                break
        if evals >= config.max_epochs:
            break
        if config.max_iterations is not None and k >= config.max_iterations:
            reason = "iterations"
            break

        if ctrl.exact:
            size = _exact_size(full, state, ctrl, n)
            if size != state.current_size:
                state.current_size = size
                state.recent_gradients.clear()
                state.stagnation_count = 0
        m = state.current_size
        evals_at_x = evals
        S = np.sort(sample_without_replacement(sampler, n, m))
        bundle = batch_gradient(spec, dataset, x, S)
        evals += effective_evals_increment("gradient", m, n)
        g = bundle.batch_mean
        f_batch = _mean(bundle.values)
        if not f_batch <= DIVERGENCE_LIMIT:
            raise DivergenceError(f"sampled objective {f_batch:.3e} at iteration {k}")

        degenerate = not float(g @ g) > 0.0
        stats = None if degenerate or m < 2 else compute_batch_stats(bundle)

        backtracks = 0
        if config.linesearch is not None and not degenerate:
            zeta = contraction_factor(stats) if stats is not None else 2.0
            res = backtrack(spec, dataset, x, bundle, S, l_prev, config.linesearch,
                            zeta=zeta, f_start=f_batch)
            evals += res.function_evals * effective_evals_increment("function", m, n)
            l_prev = res.l_k
            alpha, l_k, backtracks = res.alpha_k, res.l_k, res.backtracks
        elif config.linesearch is not None:
            alpha, l_k = 1.0 / l_prev, l_prev
        else:
            alpha, l_k = config.alpha, 1.0 / config.alpha
        x_new = x - alpha * g

        if ctrl.exact:
            decision = Decision(m, Branch.EXACT)
        else:
            decision = controller_step(state, bundle, ctrl, n)

        rec = TraceRecord(
            k=k, sample_size=m, alpha=alpha, l_k=l_k, eff_evals=evals_at_x,
            f_error=math.nan, grad_inf=math.nan, angle_deg=math.nan, beta=math.nan,
            ip_lhs=math.nan, ip_rhs=math.nan, orth_lhs=math.nan, orth_rhs=math.nan,
            branch=decision.branch.value, backtracks=backtracks,
        )
        if stats is not None:
            ip, orth, nt = (inner_product_test(stats, ctrl.theta),
                            orthogonality_test(stats, ctrl.nu), norm_test(stats, ctrl.theta))
            rec.ip_lhs, rec.ip_rhs = ip.lhs, ip.rhs
            rec.orth_lhs, rec.orth_rhs = orth.lhs, orth.rhs
            rec.norm_lhs, rec.norm_rhs = nt.lhs, nt.rhs
        if full is not None:
            rec.f_error, rec.grad_inf = f_err, g_inf
            if not degenerate and np.any(full.batch_mean):
                rec.angle_deg = angle_degrees(g, full.batch_mean)
                rec.beta = beta_from_stats(population_stats_from_bundle(full), ctrl.theta)[0]
        trace.append(rec)
        if config.record_iterates:
            iterates.append((k, m, x.copy()))

        apply_decision(state, bundle, decision)
        if not (np.all(np.isfinite(x_new)) and np.linalg.norm(x_new) <= DIVERGENCE_LIMIT):
            raise DivergenceError(f"iterate left the finite range at iteration {k}")
        x = x_new
        if decision.converged:
            reason = "converged"
            full = batch_gradient(spec, dataset, x, everything)
            f_err = _mean(full.values) - r_star
            g_inf = float(np.max(np.abs(full.batch_mean)))
            break

    if reason in ("budget", "iterations") and (len(trace) == 0 or math.isnan(f_err) or
                               (config.diagnostics_every > 1)):
        full = batch_gradient(spec, dataset, x, everything)
        f_err = _mean(full.values) - r_star
        g_inf = float(np.max(np.abs(full.batch_mean)))
    return RunResult(x, trace, reason, r_star, f_err, g_inf, evals, iterates)
