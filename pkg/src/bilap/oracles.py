"""Independent reference solutions and inequality checks.

Nothing here goes through the Duhamel step recurrence in ``duhamel``: the
closed forms are evaluated node by node, and the integrating-factor stepper
has its own per-mode update.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .catalog import KernelSpec, NonlinearitySpec
from .duhamel import ProblemParams
from .spectral import (
    SQRT_2PI,
    Field,
    GridSpec,
    SpaceTimeField,
    TimeGrid,
    fourth_derivative,
    inverse_transform,
    l1_norm,
    spacetime_l2_squared,
    transform,
)

SERIES_CUTOFF = 1e-4
BLOWUP_FACTOR = 1e6


@dataclass
class OracleResult:
    name: str
    max_abs_error: float
    max_rel_error: float
    passed: bool
    tolerance: float
    detail: str = ""

    def as_row(self) -> dict:
        return asdict(self)


def _rate(grid: GridSpec, params: ProblemParams) -> np.ndarray:
    # same symbol as the engine, written out again on purpose
    p = grid.p
    drift = np.where(grid.mode_index == -grid.points // 2, 0.0, p)
    return params.a - p**4 + 1j * params.b * drift


def _frames(coeffs: np.ndarray, grid: GridSpec, timegrid: TimeGrid, u0: Field) -> SpaceTimeField:
    values = inverse_transform(coeffs, grid)
    values[0] = u0.values
    return SpaceTimeField(grid, timegrid, values)


def exact_linear_solution(u0: Field, params: ProblemParams, G: KernelSpec, kappa: float,
                          timegrid: TimeGrid) -> SpaceTimeField:
    """u_hat(p, t) = exp(t (lam(p) + sqrt(2 pi) kappa G_hat(p))) u0_hat(p) for F = kappa u."""
    grid = u0.grid
    rate = _rate(grid, params) + SQRT_2PI * kappa * G.transform(grid)
    u0_hat = transform(u0.values, grid)
    coeffs = np.exp(timegrid.nodes[:, None] * rate[None, :]) * u0_hat
    return _frames(coeffs, grid, timegrid, u0)


def _exprel(w: np.ndarray) -> np.ndarray:
    """(e^w - 1)/w with the removable singularity at 0."""
    out = np.empty_like(w)
    small = np.abs(w) < SERIES_CUTOFF
    ws = w[~small]
    out[~small] = (np.exp(ws) - 1.0) / ws
    wz = w[small]
    out[small] = 1.0 + wz / 2.0 + wz**2 / 6.0 + wz**3 / 24.0
    return out


def exact_forcing_solution(u0: Field, params: ProblemParams, G: KernelSpec, h: Field,
                           timegrid: TimeGrid) -> SpaceTimeField:
    """u_hat = e^{t lam} u0_hat + sqrt(2 pi) G_hat h_hat (e^{t lam} - 1)/lam for F = h(x)."""
    grid = u0.grid
    lam = _rate(grid, params)
    src = SQRT_2PI * G.transform(grid) * transform(h.values, grid)
    t = timegrid.nodes[:, None]
    tl = t * lam[None, :]
    # (e^{t lam} - 1)/lam = t * exprel(t lam); the p = 0, a = 0 mode grows like t
    coeffs = np.exp(tl) * transform(u0.values, grid) + src * t * _exprel(tl)
    return _frames(coeffs, grid, timegrid, u0)


def if_stepper_solve(u0: Field, params: ProblemParams, G: KernelSpec, F: NonlinearitySpec,
                     timegrid: TimeGrid, substeps: int = 1) -> SpaceTimeField:
    """Integrating-factor RK4 on w_hat = e^{-t lam} u_hat, restarted every step.

    Written with the factors multiplied through so that no e^{+p^4 t} is
    ever formed.
    """
    if substeps < 1:
        raise ValueError("substeps must be >= 1")
    grid = u0.grid
    lam = _rate(grid, params)
    h = timegrid.dt / substeps
    E = np.exp(h * lam)
    E2 = np.exp(0.5 * h * lam)
    ghat = SQRT_2PI * G.transform(grid)

    def rhs(uh):
        return ghat * transform(F.apply(inverse_transform(uh, grid, check=False)), grid)

    uh = transform(u0.values, grid)
    scale = np.max(np.abs(uh))
    out = np.empty((timegrid.steps + 1, grid.points), dtype=complex)
    out[0] = uh
    for m in range(timegrid.steps):
        for _ in range(substeps):
            n1 = rhs(uh)
            n2 = rhs(E2 * (uh + 0.5 * h * n1))
            n3 = rhs(E2 * uh + 0.5 * h * n2)
            n4 = rhs(E * uh + h * E2 * n3)
            uh = E * uh + (h / 6.0) * (E * n1 + 2.0 * E2 * (n2 + n3) + n4)
        peak = np.max(np.abs(uh))
        if m == 0 and scale == 0:
            scale = peak
        if not np.isfinite(peak) or peak > BLOWUP_FACTOR * max(scale, 1e-300):
            raise FloatingPointError(f"integrating-factor stepper blew up at step {m + 1}")
        out[m + 1] = uh
    return _frames(out, grid, timegrid, u0)


def relative_l2_error(u: SpaceTimeField, ref: SpaceTimeField) -> float:
    """|u - ref| / |ref| in L2 over space-time."""
    if not u.same_layout(ref):
        raise ValueError("fields have different layouts")
    num = spacetime_l2_squared(u.values - ref.values, u.grid, u.timegrid)
    den = spacetime_l2_squared(ref.values, u.grid, u.timegrid)
    return float(np.sqrt(num / den)) if den > 0 else float(np.sqrt(num))


def compare_fields(name: str, u: SpaceTimeField, ref: SpaceTimeField, tolerance: float) -> OracleResult:
    rel = relative_l2_error(u, ref)
    abs_err = float(np.max(np.abs(u.values - ref.values)))
    return OracleResult(name, abs_err, rel, rel <= tolerance, tolerance)


def check_fourier_bounds(G: KernelSpec, grid: GridSpec, slack: float = 1e-9) -> OracleResult:
    """sup |G_hat| <= |G|_L1 / sqrt(2 pi) and sup |p^4 G_hat| <= |G''''|_L1 / sqrt(2 pi).

    Both sides are discrete on ``grid``; G'''' is the spectral fourth
    derivative of the samples.  ``max_rel_error`` reports the worse of the
    two violations (negative when both hold strictly), scaled by the bound.
    """
    samples = G.sample(grid)
    ghat = G.transform(grid)
    lhs0 = np.abs(ghat)
    rhs0 = l1_norm(samples) / SQRT_2PI
    lhs4 = np.abs(grid.p**4 * ghat)
    rhs4 = l1_norm(fourth_derivative(samples)) / SQRT_2PI
    v0 = lhs0 - rhs0
    v4 = lhs4 - rhs4
    worst0, worst4 = float(np.max(v0)), float(np.max(v4))
    passed = worst0 <= slack and worst4 <= slack
    detail = f"bound0 {rhs0:.6g} slack {-worst0:.3e}; bound4 {rhs4:.6g} slack {-worst4:.3e}"
    if not passed:
        j = int(np.argmax(v0)) if worst0 > slack else int(np.argmax(v4))
        detail += f"; violated at p = {grid.p[j]:.6g}"
    worst = max(worst0, worst4)
    rel = max(worst0 / rhs0, worst4 / rhs4 if rhs4 > 0 else worst4)
    return OracleResult(f"fourier_bounds[{G}]", worst, rel, passed, slack, detail)


def direct_convolution(G: KernelSpec, f: Field) -> Field:
    """O(N^2) periodic quadrature sum_j G(x_i - x_j) f(x_j) dx."""
    grid = f.grid
    x = grid.x
    diff = x[:, None] - x[None, :]
    # wrap into [-L, L)
    diff = (diff + grid.half_width) % (2 * grid.half_width) - grid.half_width
    if G.family == "sampled":
        idx = np.rint((diff + grid.half_width) / grid.dx).astype(int) % grid.points
        kern = G.samples.values[idx]
    else:
        kern = G.evaluate(diff)
    return Field(grid, kern @ f.values * grid.dx)


def random_smooth_field(grid: GridSpec, timegrid: TimeGrid, rng: np.random.Generator,
                        bumps: int = 4) -> SpaceTimeField:
    """Sum of Gaussian bumps in x with random smooth (low-order trig) amplitudes in t."""
    x = grid.x[None, :]
    t = timegrid.nodes[:, None] / timegrid.horizon
    total = np.zeros((timegrid.steps + 1, grid.points))
    for _ in range(bumps):
        c = rng.uniform(-5.0, 5.0)
        w = rng.uniform(0.7, 2.5)
        c0, c1, c2 = rng.normal(size=3)
        freq = rng.uniform(0.5, 3.0)
        amp = c0 + c1 * np.cos(np.pi * freq * t) + c2 * t
        total += amp * np.exp(-0.5 * ((x - c) / w) ** 2)
    return SpaceTimeField(grid, timegrid, total)
