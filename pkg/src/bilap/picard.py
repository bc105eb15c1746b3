"""Picard iteration of the Duhamel map, with contraction instrumentation."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .catalog import KernelSpec, NonlinearitySpec, kernel_g_constant
from .certify import contraction_constant
from .duhamel import ProblemParams, apply_semigroup, apply_tau, mode_rate
from .spectral import (
    Field,
    SpaceTimeField,
    TimeGrid,
    inverse_transform,
    spacetime_l2_norm,
    transform,
    w142_norm,
)

log = logging.getLogger(__name__)


class UncertifiedError(ValueError):
    """The contraction constant is not below one and no override was given."""


class ConvergenceError(RuntimeError):
    def __init__(self, message, report: "SolveReport"):
        super().__init__(message)
        self.report = report


class WindowError(RuntimeError):
    def __init__(self, message, window: int):
        super().__init__(message)
        self.window = window


@dataclass
class SolveReport:
    iterations: int = 0
    residual_history: list[float] = field(default_factory=list)
    measured_ratios: list[float] = field(default_factory=list)
    certified_q: float = float("nan")
    converged: bool = False
    final_w142_norm: float = float("nan")
    l2_history: list[float] = field(default_factory=list)

    @property
    def measured_ratio_max(self) -> float:
        return max(self.measured_ratios) if self.measured_ratios else 0.0


def certified_constant(u0: Field, params: ProblemParams, G: KernelSpec,
                       F: NonlinearitySpec, T: float) -> float:
    g = kernel_g_constant(G, u0.grid)
    return contraction_constant(g, F.l, params.a, params.b, T)


def semigroup_evolution(u0: Field, params: ProblemParams, timegrid: TimeGrid) -> SpaceTimeField:
    """Zeroth iterate: exp(t lam) u0_hat at every node."""
    grid = u0.grid
    lam = mode_rate(grid, params)
    u0_hat = transform(u0.values, grid)
    coeffs = np.exp(np.outer(timegrid.nodes, lam)) * u0_hat
    values = inverse_transform(coeffs, grid)
    values[0] = u0.values
    return SpaceTimeField(grid, timegrid, values)


def picard_solve(u0: Field, params: ProblemParams, G: KernelSpec, F: NonlinearitySpec,
                 timegrid: TimeGrid, tol: float = 1e-10, max_iter: int = 50,
                 override_uncertified: bool = False,
                 initial: SpaceTimeField | None = None) -> tuple[SpaceTimeField, SolveReport]:
    """Iterate u <- tau(u) until the W^{1,(4,2)} step falls below ``tol``.

    The default starting iterate is :func:`semigroup_evolution`.  Raises
    UncertifiedError when the certified constant is >= 1 and the override
    flag is not set, ConvergenceError after ``max_iter`` applications.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    q = certified_constant(u0, params, G, F, timegrid.horizon)
    if q >= 1 and not override_uncertified:
        raise UncertifiedError(f"contraction constant q = {q:.6g} >= 1 on T = {timegrid.horizon}")
    report = SolveReport(certified_q=q)
    u = initial if initial is not None else semigroup_evolution(u0, params, timegrid)
    while report.iterations < max_iter:
        u_next = apply_tau(u, u0, params, G, F)
        diff = u_next - u
        res = w142_norm(diff)
        report.iterations += 1
        report.residual_history.append(res)
        report.l2_history.append(spacetime_l2_norm(diff))
        if len(report.residual_history) > 1:
            prev = report.residual_history[-2]
            report.measured_ratios.append(res / prev if prev > 0 else 0.0)
        log.debug("picard iteration %d: residual %.3e", report.iterations, res)
        u = u_next
        if res <= tol:
            report.converged = True
            break
    report.final_w142_norm = w142_norm(u)
    if not report.converged:
        raise ConvergenceError(
            f"no convergence to tol={tol} in {max_iter} iterations "
            f"(last residual {report.residual_history[-1]:.3e})", report)
    return u, report


def measure_contraction_ratio(v1: SpaceTimeField, v2: SpaceTimeField, u0: Field,
                              params: ProblemParams, G: KernelSpec, F: NonlinearitySpec) -> float:
    denom = w142_norm(v1 - v2)
    if denom <= 1e-12:
        raise ValueError("v1 and v2 are indistinguishable in W^{1,(4,2)}")
    u1 = apply_tau(v1, u0, params, G, F)
    u2 = apply_tau(v2, u0, params, G, F)
    return w142_norm(u1 - u2) / denom


def solve_global(u0: Field, params: ProblemParams, G: KernelSpec, F: NonlinearitySpec,
                 T_total: float, window_T: float, window_steps: int, tol: float = 1e-10,
                 max_iter: int = 50) -> tuple[SpaceTimeField, list[SolveReport]]:
    """Chain certified windows of length ``window_T`` to cover [0, T_total].

    Each window restarts from the last frame of the previous one, so the
    seam frames coincide exactly.
    """
    if window_T <= 0 or T_total <= 0:
        raise ValueError("horizons must be positive")
    dt = window_T / window_steps
    n_windows = int(round(T_total / window_T))
    if n_windows < 1 or abs(n_windows * window_T - T_total) > dt:
        raise ValueError(f"window {window_T} does not divide T_total {T_total}")
    q = certified_constant(u0, params, G, F, window_T)
    if q >= 1:
        raise UncertifiedError(f"window of length {window_T} is not certified (q = {q:.6g})")
    wgrid = TimeGrid(window_T, window_steps)
    start = u0
    chunks, reports = [], []
    for w in range(n_windows):
        try:
            u, rep = picard_solve(start, params, G, F, wgrid, tol, max_iter)
        except ConvergenceError as exc:
            raise WindowError(f"window {w} failed: {exc}", w) from exc
        chunks.append(u.values if w == 0 else u.values[1:])
        reports.append(rep)
        start = u.frame(-1)
    if n_windows == 1:
        return u, reports
    values = np.concatenate(chunks, axis=0)
    total = TimeGrid(n_windows * window_T, n_windows * window_steps)
    return SpaceTimeField(u0.grid, total, values), reports
