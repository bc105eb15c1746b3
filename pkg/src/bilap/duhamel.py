"""The Duhamel map u = tau(v) on the Fourier side.

Per frequency the linear rate is lam(p) = -p**4 + i*b*p + a and

    u_hat(t) = exp(t lam) u0_hat + int_0^t exp((t-s) lam) psi(s) ds,
    psi(s)   = sqrt(2 pi) G_hat(p) * FT[F(v(., s), .)](p).

psi is taken piecewise linear in s between time nodes and the integral over
each step is done exactly, giving the step recurrence

    u_{m+1} = e^z u_m + dt * ((phi1(z) - phi2(z)) psi_m + phi2(z) psi_{m+1}),
    z = lam * dt,  phi1(z) = (e^z - 1)/z,  phi2(z) = (e^z - 1 - z)/z**2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .catalog import KernelSpec, NonlinearitySpec
from .spectral import (
    SQRT_2PI,
    Field,
    GridSpec,
    SpaceTimeField,
    inverse_transform,
    symmetry_defect,
    transform,
)

# |z| below which phi functions use their Taylor series
SERIES_CUTOFF = 1e-4
# accepted relative imaginary residue of reconstructed frames
REALNESS_RTOL = 1e-11


@dataclass(frozen=True)
class ProblemParams:
    a: float = 0.0
    b: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b)):
            raise ValueError("a and b must be finite")
        if self.a < 0:
            raise ValueError(f"growth rate must satisfy a >= 0, got a = {self.a}")


def mode_rate(grid: GridSpec, params: ProblemParams) -> np.ndarray:
    """lam(p) in FFT order; the drift is odd, so it vanishes on the Nyquist mode."""
    return -grid.p**4 + 1j * params.b * grid.p_odd + params.a


def semigroup_multiplier(p, t: float, params: ProblemParams):
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    p = np.asarray(p, dtype=float)
    return np.exp(t * (-p**4 + 1j * params.b * p + params.a))


def apply_semigroup(u0: Field, t: float, params: ProblemParams) -> Field:
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    grid = u0.grid
    if t == 0:
        return Field(grid, u0.values.copy())
    mult = np.exp(t * mode_rate(grid, params))
    return Field(grid, inverse_transform(mult * transform(u0.values, grid), grid))


def _expm1(z: np.ndarray) -> np.ndarray:
    """exp(z) - 1 for complex z without cancellation in the real part."""
    x, y = z.real, z.imag
    re = np.expm1(x) * np.cos(y) - 2.0 * np.sin(0.5 * y) ** 2
    im = np.exp(x) * np.sin(y)
    return re + 1j * im


def phi_functions(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """phi1(z), phi2(z) elementwise."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < SERIES_CUTOFF
    zs = np.where(small, 1.0, z)
    em1 = _expm1(zs)
    phi1 = em1 / zs
    phi2 = (em1 - zs) / zs**2
    zz = z[small]
    phi1[small] = 1 + zz / 2 + zz**2 / 6 + zz**3 / 24
    phi2[small] = 0.5 + zz / 6 + zz**2 / 24 + zz**3 / 120
    return phi1, phi2


def forcing_spectrum(v: np.ndarray, grid: GridSpec, G: KernelSpec, F: NonlinearitySpec) -> np.ndarray:
    """psi = sqrt(2 pi) G_hat * FT[F(v)] for frames stacked along axis 0."""
    return SQRT_2PI * G.transform(grid) * transform(F.apply(v), grid)


def _check_inputs(v: SpaceTimeField, u0: Field, F: NonlinearitySpec):
    if not v.grid.same_as(u0.grid):
        raise ValueError("v and u0 live on different grids")
    if not v.grid.same_as(F.grid):
        raise ValueError("nonlinearity offset lives on a different grid")


def _to_real(coeffs: np.ndarray, grid: GridSpec) -> np.ndarray:
    defect = symmetry_defect(coeffs, grid)
    if defect > REALNESS_RTOL:
        raise FloatingPointError(f"Duhamel output lost conjugate symmetry (defect {defect:.2e})")
    return inverse_transform(coeffs, grid, check=False)


def duhamel_coefficients(v: SpaceTimeField, u0: Field, params: ProblemParams,
                         G: KernelSpec, F: NonlinearitySpec) -> np.ndarray:
    """u_hat at every node, shape (M+1, N), FFT order."""
    _check_inputs(v, u0, F)
    grid, tg = v.grid, v.timegrid
    dt = tg.dt
    lam = mode_rate(grid, params)
    z = lam * dt
    ez = np.exp(z)
    phi1, phi2 = phi_functions(z)
    w_prev = dt * (phi1 - phi2)
    w_next = dt * phi2

    psi = forcing_spectrum(v.values, grid, G, F)
    out = np.empty((tg.steps + 1, grid.points), dtype=complex)
    out[0] = transform(u0.values, grid)
    for m in range(tg.steps):
        out[m + 1] = ez * out[m] + w_prev * psi[m] + w_next * psi[m + 1]
    return out


def apply_tau(v: SpaceTimeField, u0: Field, params: ProblemParams,
              G: KernelSpec, F: NonlinearitySpec) -> SpaceTimeField:
    """One application of the Duhamel map to the node-sampled field v."""
    coeffs = duhamel_coefficients(v, u0, params, G, F)
    values = _to_real(coeffs, v.grid)
    # frame 0 is u0 by definition; avoid a round trip through the FFT
    values[0] = u0.values
    return SpaceTimeField(v.grid, v.timegrid, values)


def rhs_time_derivative(u: SpaceTimeField, v: SpaceTimeField, params: ProblemParams,
                        G: KernelSpec, F: NonlinearitySpec) -> SpaceTimeField:
    """d/dt of tau(v) at the nodes: lam * u_hat + psi(v), back in x-space."""
    if not u.same_layout(v):
        raise ValueError("u and v must share grid and time grid")
    if not v.grid.same_as(F.grid):
        raise ValueError("nonlinearity offset lives on a different grid")
    grid = u.grid
    coeffs = mode_rate(grid, params) * transform(u.values, grid) + forcing_spectrum(v.values, grid, G, F)
    return SpaceTimeField(grid, u.timegrid, _to_real(coeffs, grid))
