"""Periodic truncation of the real line and the non-unitary Fourier convention.

The continuous transform used throughout the package is

    phi_hat(p) = (1/sqrt(2 pi)) * integral phi(x) exp(-i p x) dx,

approximated on the box [-L, L) by the rectangle rule, so that the discrete
coefficients approximate phi_hat pointwise (not the unitary DFT).  With
x_k = -L + k dx and p_j = (pi / L) n_j this is

    coeffs[j] = dx / sqrt(2 pi) * (-1)**n_j * fft(values)[j].

Frequencies are stored in FFT order ``n = 0, 1, ..., N/2-1, -N/2, ..., -1``;
``GridSpec.monotone_order`` is the permutation to increasing p.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft
from scipy.integrate import trapezoid

SQRT_2PI = float(np.sqrt(2.0 * np.pi))

# relative conjugate-symmetry defect accepted by inverse transforms
SYMMETRY_RTOL = 1e-9


def fft_workers() -> int:
    """Number of FFT worker threads, from ``SOLVER_THREADS`` (default 1)."""
    raw = os.environ.get("SOLVER_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"SOLVER_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"SOLVER_THREADS must be a positive integer, got {raw!r}")
    return n


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid on [-L, L) with ``N`` points."""

    half_width: float
    points: int

    def __post_init__(self):
        L, N = self.half_width, self.points
        if not (np.isfinite(L) and L > 0):
            raise ValueError(f"half_width must be positive and finite, got {L}")
        if int(N) != N or N < 8 or N % 2:
            raise ValueError(f"points must be an even integer >= 8, got {N}")
        object.__setattr__(self, "points", int(N))
        object.__setattr__(self, "half_width", float(L))

    @property
    def dx(self) -> float:
        return 2.0 * self.half_width / self.points

    @property
    def dp(self) -> float:
        return np.pi / self.half_width

    @cached_property
    def x(self) -> np.ndarray:
        return -self.half_width + self.dx * np.arange(self.points)

    @cached_property
    def mode_index(self) -> np.ndarray:
        """Integer mode numbers n_j in FFT order."""
        return np.rint(sfft.fftfreq(self.points, d=1.0 / self.points)).astype(np.int64)

    @cached_property
    def p(self) -> np.ndarray:
        return self.dp * self.mode_index

    @cached_property
    def p_odd(self) -> np.ndarray:
        """Frequencies for odd multipliers: the Nyquist mode is zeroed."""
        q = self.p.copy()
        q[self.points // 2] = 0.0
        return q

    @cached_property
    def monotone_order(self) -> np.ndarray:
        """Permutation taking FFT order to increasing frequency."""
        return np.argsort(self.mode_index, kind="stable")

    @property
    def p_sorted(self) -> np.ndarray:
        return self.p[self.monotone_order]

    @cached_property
    def _phase(self) -> np.ndarray:
        # exp(i p_j L) = (-1)**n_j since p_j L = pi n_j
        return np.where(self.mode_index % 2 == 0, 1.0, -1.0)

    @cached_property
    def mirror_index(self) -> np.ndarray:
        """Index of -p_j for each j; the Nyquist and zero modes map to themselves."""
        return (-np.arange(self.points)) % self.points

    def same_as(self, other: "GridSpec") -> bool:
        return self.half_width == other.half_width and self.points == other.points


def make_grid(L: float, N: int) -> GridSpec:
    return GridSpec(L, N)


@dataclass(frozen=True, eq=False)
class Field:
    """Real samples of a function of x on ``grid``."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.points,):
            raise ValueError(f"expected {self.grid.points} samples, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field contains non-finite samples")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid: GridSpec, func) -> "Field":
        return cls(grid, func(grid.x))

    def _check(self, other: "Field"):
        if not self.grid.same_as(other.grid):
            raise ValueError("fields live on different grids")

    def __add__(self, other: "Field") -> "Field":
        self._check(other)
        return Field(self.grid, self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        self._check(other)
        return Field(self.grid, self.values - other.values)

    def __mul__(self, c: float) -> "Field":
        return Field(self.grid, c * self.values)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Coefficients approximating phi_hat(p_j), FFT order."""

    grid: GridSpec
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (self.grid.points,):
            raise ValueError(f"expected {self.grid.points} coefficients, got shape {c.shape}")
        object.__setattr__(self, "coeffs", c)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform nodes t_m = m * T / M, m = 0..M."""

    horizon: float
    steps: int

    def __post_init__(self):
        if not (np.isfinite(self.horizon) and self.horizon > 0):
            raise ValueError(f"horizon must be positive, got {self.horizon}")
        if int(self.steps) != self.steps or self.steps < 2:
            raise ValueError(f"steps must be an integer >= 2, got {self.steps}")
        object.__setattr__(self, "steps", int(self.steps))
        object.__setattr__(self, "horizon", float(self.horizon))

    @property
    def dt(self) -> float:
        return self.horizon / self.steps

    @cached_property
    def nodes(self) -> np.ndarray:
        t = self.dt * np.arange(self.steps + 1)
        t[-1] = self.horizon
        return t


@dataclass(frozen=True, eq=False)
class SpaceTimeField:
    """One spatial frame per time node; ``values[m]`` is the frame at t_m."""

    grid: GridSpec
    timegrid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        shape = (self.timegrid.steps + 1, self.grid.points)
        if v.shape != shape:
            raise ValueError(f"expected frames of shape {shape}, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("space-time field contains non-finite samples")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid: GridSpec, timegrid: TimeGrid, func) -> "SpaceTimeField":
        """Sample ``func(x, t)`` with broadcasting over (t, x)."""
        vals = func(grid.x[None, :], timegrid.nodes[:, None])
        return cls(grid, timegrid, np.array(np.broadcast_to(vals, (timegrid.steps + 1, grid.points))))

    @classmethod
    def constant_in_time(cls, f: Field, timegrid: TimeGrid) -> "SpaceTimeField":
        return cls(f.grid, timegrid, np.tile(f.values, (timegrid.steps + 1, 1)))

    @property
    def frames(self) -> list[Field]:
        return [Field(self.grid, row) for row in self.values]

    def frame(self, m: int) -> Field:
        return Field(self.grid, self.values[m])

    def same_layout(self, other: "SpaceTimeField") -> bool:
        return self.grid.same_as(other.grid) and self.timegrid == other.timegrid

    def _check(self, other: "SpaceTimeField"):
        if not self.same_layout(other):
            raise ValueError("space-time fields have different grids")

    def __add__(self, other: "SpaceTimeField") -> "SpaceTimeField":
        self._check(other)
        return SpaceTimeField(self.grid, self.timegrid, self.values + other.values)

    def __sub__(self, other: "SpaceTimeField") -> "SpaceTimeField":
        self._check(other)
        return SpaceTimeField(self.grid, self.timegrid, self.values - other.values)

    def __mul__(self, c: float) -> "SpaceTimeField":
        return SpaceTimeField(self.grid, self.timegrid, c * self.values)

    __rmul__ = __mul__


# -- array-level transforms (last axis is x) ---------------------------------

def transform(values: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Scaled DFT along the last axis; returns coefficients in FFT order."""
    fhat = sfft.fft(values, axis=-1, workers=fft_workers())
    return (grid.dx / SQRT_2PI) * grid._phase * fhat


def symmetry_defect(coeffs: np.ndarray, grid: GridSpec) -> float:
    """max |c(-p) - conj c(p)| relative to max |c| (0 for the zero spectrum)."""
    scale = np.max(np.abs(coeffs)) if coeffs.size else 0.0
    if scale == 0.0:
        return 0.0
    diff = coeffs[..., grid.mirror_index] - np.conj(coeffs)
    return float(np.max(np.abs(diff)) / scale)


def inverse_transform(coeffs: np.ndarray, grid: GridSpec, check: bool = True) -> np.ndarray:
    """Inverse of :func:`transform`; the result is real.

    Raises ValueError when the coefficients are not conjugate symmetric
    within ``SYMMETRY_RTOL``.
    """
    if check:
        defect = symmetry_defect(coeffs, grid)
        if defect > SYMMETRY_RTOL:
            raise ValueError(f"spectrum is not conjugate symmetric (defect {defect:.3e})")
    # sqrt(2 pi)/dx * ifft undoes the forward scaling because dx*dp*N = 2 pi
    out = sfft.ifft(grid._phase * coeffs, axis=-1, workers=fft_workers())
    return (SQRT_2PI / grid.dx) * out.real


def forward_ft(f: Field) -> SpectralField:
    return SpectralField(f.grid, transform(f.values, f.grid))


def inverse_ft(F: SpectralField) -> Field:
    return Field(F.grid, inverse_transform(F.coeffs, F.grid))


def apply_multiplier(values: np.ndarray, grid: GridSpec, symbol: np.ndarray) -> np.ndarray:
    """Real-space action of a Fourier multiplier given in FFT order."""
    return inverse_transform(symbol * transform(values, grid), grid)


def fourth_derivative(f: Field) -> Field:
    return Field(f.grid, apply_multiplier(f.values, f.grid, f.grid.p**4))


# -- norms -------------------------------------------------------------------

def l2_norm(f: Field) -> float:
    return float(np.sqrt(np.sum(f.values**2) * f.grid.dx))


def l1_norm(f: Field) -> float:
    return float(np.sum(np.abs(f.values)) * f.grid.dx)


def h4_norm(f: Field) -> float:
    return float(np.hypot(l2_norm(f), l2_norm(fourth_derivative(f))))


def spectral_l2_norm(F: SpectralField) -> float:
    """sqrt(sum |F|^2 dp); equals l2_norm of the inverse by Parseval."""
    return float(np.sqrt(np.sum(np.abs(F.coeffs) ** 2) * F.grid.dp))


def time_derivative(u: SpaceTimeField) -> np.ndarray:
    """Second-order finite differences in t (one-sided at both ends)."""
    if u.timegrid.steps < 2:
        raise ValueError("need at least 3 frames")
    return np.gradient(u.values, u.timegrid.dt, axis=0, edge_order=2)


def spacetime_l2_squared(values: np.ndarray, grid: GridSpec, timegrid: TimeGrid) -> float:
    """Rectangle rule in x, trapezoid rule in t."""
    per_frame = np.sum(values**2, axis=-1) * grid.dx
    return float(trapezoid(per_frame, dx=timegrid.dt))


def spacetime_l2_norm(u: SpaceTimeField) -> float:
    return float(np.sqrt(spacetime_l2_squared(u.values, u.grid, u.timegrid)))


def w142_norm(u: SpaceTimeField) -> float:
    """sqrt(|du/dt|^2 + |d4u/dx4|^2 + |u|^2), all in L2 over space-time."""
    if u.values.shape[0] < 3:
        raise ValueError("w142_norm needs at least 3 time frames")
    grid, tg = u.grid, u.timegrid
    dudt = time_derivative(u)
    d4u = apply_multiplier(u.values, grid, grid.p**4)
    total = (spacetime_l2_squared(dudt, grid, tg)
             + spacetime_l2_squared(d4u, grid, tg)
             + spacetime_l2_squared(u.values, grid, tg))
    return float(np.sqrt(total))
