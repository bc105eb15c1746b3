"""Kernels G and nonlinearities F with their declared constants.

Kernels carry closed-form fourth derivatives so that the constant

    g = sqrt(|G|_L1**2 + |G''''|_L1**2)

is computed by quadrature of exact values rather than of a differentiated
sample.  Nonlinearities have the form ``F(u, x) = base(u) + h(x)`` with the
growth constant ``k`` and Lipschitz constant ``l`` declared analytically;
:func:`verify_nonlinearity_bounds` probes them.

Text forms (used by config files)::

    gaussian(sigma=1.0,amp=1.0)       amp * standard normal density of width sigma
    bump(width=4.0,amp=1.0)           amp * exp(-1/(1-(x/width)**2)) on |x| < width
    dipole(sigma=1.0,amp=1.0)         amp * (x/sigma) * exp(-(x/sigma)**2)

    linear(kappa=2.0)                 kappa * u
    tanh(s=0.05)+h:gaussian(sigma=2.0,amp=0.1)
    forcing()+h:gaussian(sigma=2.0,amp=0.1)
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from math import factorial

import numpy as np
from numpy.polynomial import hermite, hermite_e

from .spectral import (
    SQRT_2PI,
    Field,
    GridSpec,
    forward_ft,
    fourth_derivative,
    inverse_transform,
    transform,
)

# kernels must fall below this fraction of their peak at |x| = L
DECAY_RTOL = 1e-12
# adaptive L1 quadrature
L1_RTOL = 1e-8
L1_MAX_POINTS = 2**23


# -- kernel families ---------------------------------------------------------

def _gaussian(x, sigma, amp, order):
    s = x / sigma
    base = amp / (sigma * SQRT_2PI) * np.exp(-0.5 * s * s)
    if order == 0:
        return base
    # d^4/ds^4 exp(-s^2/2) = He_4(s) exp(-s^2/2)
    return base * hermite_e.hermeval(s, [0, 0, 0, 0, 1]) / sigma**4


def _dipole(x, sigma, amp, order):
    s = x / sigma
    e = np.exp(-s * s)
    if order == 0:
        return amp * s * e
    # s exp(-s^2) = -(1/2) d/ds exp(-s^2), and d^n/ds^n exp(-s^2) = (-1)^n H_n(s) exp(-s^2)
    return amp * 0.5 * hermite.hermval(s, [0, 0, 0, 0, 0, 1]) * e / sigma**4


def _bump_log_derivs(s):
    """Derivatives 0..4 of phi(s) = 1/(s^2 - 1) via partial fractions."""
    out = []
    for n in range(5):
        c = 0.5 * (-1) ** n * factorial(n)
        out.append(c * ((s - 1.0) ** -(n + 1) - (s + 1.0) ** -(n + 1)))
    return out


def _bump(x, width, amp, order):
    s = np.asarray(x, dtype=float) / width
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    si = s[inside]
    phi, d1, d2, d3, d4 = _bump_log_derivs(si)
    # exp(phi) underflows long before the polynomial factor overflows
    keep = phi > -700.0
    e = np.where(keep, np.exp(np.where(keep, phi, 0.0)), 0.0)
    if order == 0:
        vals = e
    else:
        with np.errstate(over="ignore", invalid="ignore"):
            poly = d4 + 4 * d1 * d3 + 3 * d2 * d2 + 6 * d1 * d1 * d2 + d1**4
            vals = np.where(keep, e * np.where(keep, poly, 0.0), 0.0) / width**4
    out[inside] = amp * vals
    return out


_KERNELS = {
    "gaussian": (_gaussian, ("sigma", "amp")),
    "dipole": (_dipole, ("sigma", "amp")),
    "bump": (_bump, ("width", "amp")),
}


@dataclass(frozen=True, eq=False)
class KernelSpec:
    """A convolution kernel G with cached L1 constants.

    ``family`` is one of ``gaussian``, ``dipole``, ``bump`` or ``sampled``.
    Sampled kernels are tied to the grid they were sampled on; their fourth
    derivative is spectral and their L1 norms use that grid only.
    """

    family: str
    params: dict = field(default_factory=dict)
    samples: Field | None = None
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.family == "sampled":
            if self.samples is None:
                raise ValueError("sampled kernel needs samples")
        elif self.family in _KERNELS:
            names = _KERNELS[self.family][1]
            if set(self.params) != set(names):
                raise ValueError(f"{self.family} kernel takes parameters {names}, got {sorted(self.params)}")
            for name in names:
                val = float(self.params[name])
                if not np.isfinite(val):
                    raise ValueError(f"{name} must be finite")
            if float(self.params[names[0]]) <= 0:
                raise ValueError(f"{names[0]} must be positive")
        else:
            raise ValueError(f"unknown kernel family {self.family!r}")

    @classmethod
    def gaussian(cls, sigma=1.0, amp=1.0):
        return cls("gaussian", {"sigma": float(sigma), "amp": float(amp)})

    @classmethod
    def dipole(cls, sigma=1.0, amp=1.0):
        return cls("dipole", {"sigma": float(sigma), "amp": float(amp)})

    @classmethod
    def bump(cls, width=4.0, amp=1.0):
        return cls("bump", {"width": float(width), "amp": float(amp)})

    @classmethod
    def from_samples(cls, f: Field):
        return cls("sampled", {}, f)

    def scaled(self, c: float) -> "KernelSpec":
        if self.family == "sampled":
            return KernelSpec.from_samples(self.samples * c)
        params = dict(self.params)
        params["amp"] = params["amp"] * c
        return KernelSpec(self.family, params)

    def __str__(self):
        if self.family == "sampled":
            return f"sampled(N={self.samples.grid.points})"
        args = ",".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"{self.family}({args})"

    # evaluation -------------------------------------------------------------

    def evaluate(self, x, order: int = 0) -> np.ndarray:
        """G (order 0) or G'''' (order 4) at arbitrary points; analytic families only."""
        if self.family == "sampled":
            raise ValueError("sampled kernels have no pointwise evaluation")
        if order not in (0, 4):
            raise ValueError("order must be 0 or 4")
        func, names = _KERNELS[self.family]
        return func(np.asarray(x, dtype=float), *(self.params[n] for n in names), order)

    def sample(self, grid: GridSpec) -> Field:
        if self.family == "sampled":
            if not self.samples.grid.same_as(grid):
                raise ValueError("sampled kernel used on a different grid")
            return self.samples
        return Field(grid, self.evaluate(grid.x))

    def transform(self, grid: GridSpec) -> np.ndarray:
        """G_hat on the grid frequencies (FFT order), cached per grid."""
        key = ("hat", grid)
        if key not in self._cache:
            self._cache[key] = forward_ft(self.sample(grid)).coeffs
        return self._cache[key]

    def check_decay(self, grid: GridSpec):
        vals = self.sample(grid).values
        peak = np.max(np.abs(vals))
        if self.family == "sampled":
            edge = max(abs(vals[0]), abs(vals[-1]))
        else:
            edge = float(np.max(np.abs(self.evaluate([-grid.half_width, grid.half_width]))))
        if peak > 0 and edge > DECAY_RTOL * peak:
            raise ValueError(f"kernel {self} does not decay on [-{grid.half_width}, {grid.half_width}]")

    def l1_norms(self, grid: GridSpec) -> tuple[float, float]:
        """(|G|_L1, |G''''|_L1) over [-L, L]."""
        key = ("l1", grid)
        if key not in self._cache:
            self.check_decay(grid)
            if self.family == "sampled":
                f = self.samples
                l1 = float(np.sum(np.abs(f.values)) * grid.dx)
                l1_4 = float(np.sum(np.abs(fourth_derivative(f).values)) * grid.dx)
            else:
                l1 = adaptive_l1(lambda x: self.evaluate(x), grid.half_width, grid.points)
                l1_4 = adaptive_l1(lambda x: self.evaluate(x, 4), grid.half_width, grid.points)
            self._cache[key] = (l1, l1_4)
        return self._cache[key]


def adaptive_l1(func, half_width: float, points: int, rtol: float = L1_RTOL) -> float:
    """Rectangle-rule integral of |func| on [-L, L), halving dx to convergence."""
    n = points
    prev = None
    while True:
        x = np.linspace(-half_width, half_width, n, endpoint=False)
        val = float(np.sum(np.abs(func(x))) * (2.0 * half_width / n))
        if prev is not None and abs(val - prev) <= rtol * abs(val):
            return val
        if 2 * n > L1_MAX_POINTS:
            raise RuntimeError(f"L1 quadrature did not converge (last change {abs(val - prev):.2e})")
        prev = val
        n *= 2


def kernel_g_constant(G: KernelSpec, grid: GridSpec) -> float:
    """sqrt(|G|_L1^2 + |G''''|_L1^2); rejects numerically zero kernels."""
    l1, l1_4 = G.l1_norms(grid)
    if l1 < 1e-14:
        raise ValueError(f"kernel {G} is numerically zero (|G|_L1 = {l1:.3e})")
    return float(np.hypot(l1, l1_4))


def convolve_with_kernel(G: KernelSpec, f: Field) -> Field:
    """integral G(x - y) f(y) dy, evaluated as sqrt(2 pi) G_hat f_hat."""
    if G.family == "sampled" and not G.samples.grid.same_as(f.grid):
        raise ValueError("kernel and field live on different grids")
    grid = f.grid
    return Field(grid, inverse_transform(SQRT_2PI * G.transform(grid) * transform(f.values, grid), grid))


# -- nonlinearities ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class NonlinearitySpec:
    """F(u, x) = base(u) + h(x) with declared constants k (growth) and l (Lipschitz).

    ``family``: ``linear`` (base = kappa*u), ``tanh`` (base = s*tanh(u)) or
    ``forcing`` (base = 0).  ``coef`` is kappa or s.
    """

    family: str
    coef: float
    h: Field
    k: float
    l: float
    label: str = ""

    def __post_init__(self):
        if self.family not in ("linear", "tanh", "forcing"):
            raise ValueError(f"unknown nonlinearity family {self.family!r}")
        if np.any(self.h.values < 0):
            raise ValueError("offset h must be nonnegative")
        if self.k < 0 or self.l < 0 or not (np.isfinite(self.k) and np.isfinite(self.l)):
            raise ValueError("constants k and l must be finite and nonnegative")

    @property
    def grid(self) -> GridSpec:
        return self.h.grid

    @classmethod
    def linear(cls, grid: GridSpec, kappa: float, h: Field | None = None):
        h = h if h is not None else Field(grid, np.zeros(grid.points))
        return cls("linear", float(kappa), h, abs(kappa), abs(kappa), f"linear(kappa={kappa!r})")

    @classmethod
    def saturating(cls, grid: GridSpec, s: float, h: Field | None = None):
        h = h if h is not None else Field(grid, np.zeros(grid.points))
        # |tanh u| <= |u| and sup |tanh'| = 1
        return cls("tanh", float(s), h, abs(s), abs(s), f"tanh(s={s!r})")

    @classmethod
    def forcing(cls, h: Field):
        return cls("forcing", 0.0, h, 0.0, 0.0, "forcing()")

    def with_constants(self, k: float | None = None, l: float | None = None) -> "NonlinearitySpec":
        """Copy with overridden declared constants (no verification)."""
        return NonlinearitySpec(self.family, self.coef, self.h,
                                self.k if k is None else k, self.l if l is None else l, self.label)

    def base(self, u: np.ndarray) -> np.ndarray:
        if self.family == "linear":
            return self.coef * u
        if self.family == "tanh":
            return self.coef * np.tanh(u)
        return np.zeros_like(u)

    def apply(self, u: np.ndarray) -> np.ndarray:
        """F(u(x_j), x_j) for arrays whose last axis is x."""
        return self.base(np.asarray(u, dtype=float)) + self.h.values

    def at_zero(self) -> Field:
        return Field(self.grid, self.apply(np.zeros(self.grid.points)))

    @property
    def u_independent(self) -> bool:
        return self.family == "forcing" or self.coef == 0.0


def eval_nonlinearity(F: NonlinearitySpec, u: Field) -> Field:
    if not u.grid.same_as(F.grid):
        raise ValueError("field and nonlinearity offset live on different grids")
    return Field(u.grid, F.apply(u.values))


class AssumptionViolation(ValueError):
    """A probe broke the declared growth or Lipschitz bound."""

    def __init__(self, message, triple):
        super().__init__(message)
        self.triple = triple


@dataclass
class AssumptionReport:
    probes: int
    worst_growth_slack: float
    worst_lipschitz_ratio: float
    lipschitz_slack: float


def verify_nonlinearity_bounds(F: NonlinearitySpec, probes: int = 1000, seed: int = 0,
                               rtol: float = 1e-8) -> AssumptionReport:
    """Probe |F(u,x)| <= k|u| + h(x) and |F(u1,x) - F(u2,x)| <= l|u1 - u2|.

    A quarter of the probes are concentrated near u = 0, where the slope of
    saturating families peaks.  Raises AssumptionViolation on the first
    offending (u1, u2, x).
    """
    if probes < 100:
        raise ValueError("need at least 100 probes")
    rng = np.random.default_rng(seed)
    grid = F.grid
    n_near = probes // 4
    mag = 10.0 ** rng.uniform(-4.0, 1.5, probes)
    mag[:n_near] = 10.0 ** rng.uniform(-6.0, -3.0, n_near)
    u1 = mag * rng.choice([-1.0, 1.0], probes)
    step = 10.0 ** rng.uniform(-4.0, 1.0, probes)
    step[:n_near] = mag[:n_near] * rng.uniform(0.01, 1.0, n_near)
    u2 = u1 + step * rng.choice([-1.0, 1.0], probes)
    idx = rng.integers(0, grid.points, probes)
    h = F.h.values[idx]

    f1 = F.base(u1) + h
    f2 = F.base(u2) + h
    bound = F.k * np.abs(u1) + h
    growth_slack = bound * (1 + rtol) + 1e-300 - np.abs(f1)
    bad = np.flatnonzero(growth_slack < 0)
    if bad.size:
        i = bad[0]
        triple = (float(u1[i]), float(u2[i]), float(grid.x[idx[i]]))
        raise AssumptionViolation(f"growth bound fails at (u1, u2, x) = {triple}", triple)

    ratio = np.abs(f1 - f2) / np.abs(u1 - u2)
    bad = np.flatnonzero(ratio > F.l * (1 + rtol))
    if bad.size:
        i = bad[0]
        triple = (float(u1[i]), float(u2[i]), float(grid.x[idx[i]]))
        raise AssumptionViolation(
            f"Lipschitz bound l={F.l} fails at (u1, u2, x) = {triple} (ratio {ratio[i]:.6g})", triple)
    worst = float(np.max(ratio))
    return AssumptionReport(probes, float(np.min(growth_slack)), worst, F.l - worst)


# -- text forms --------------------------------------------------------------

_CALL = re.compile(r"^\s*([a-z_]+)\s*\((.*)\)\s*$")


def _parse_call(text: str) -> tuple[str, dict]:
    m = _CALL.match(text)
    if not m:
        raise ValueError(f"cannot parse {text!r}; expected name(key=value,...)")
    name, body = m.group(1), m.group(2).strip()
    params = {}
    if body:
        for item in body.split(","):
            if "=" not in item:
                raise ValueError(f"bad argument {item!r} in {text!r}")
            key, val = (s.strip() for s in item.split("=", 1))
            try:
                params[key] = float(val)
            except ValueError:
                raise ValueError(f"argument {key} in {text!r} is not a number") from None
    return name, params


def parse_kernel(text: str) -> KernelSpec:
    name, params = _parse_call(text)
    if name not in _KERNELS:
        raise ValueError(f"unknown kernel family {name!r} in {text!r}")
    defaults = {"sigma": 1.0, "width": 4.0, "amp": 1.0}
    names = _KERNELS[name][1]
    unknown = set(params) - set(names)
    if unknown:
        raise ValueError(f"unknown parameters {sorted(unknown)} for {name}")
    return KernelSpec(name, {n: params.get(n, defaults[n]) for n in names})


def parse_profile(text: str, grid: GridSpec) -> Field:
    """Nonnegative offset h sampled on ``grid`` from a kernel-style text form."""
    spec = parse_kernel(text)
    f = spec.sample(grid)
    if np.any(f.values < 0):
        raise ValueError(f"offset profile {text!r} takes negative values")
    return f


def parse_nonlinearity(text: str, grid: GridSpec) -> NonlinearitySpec:
    head, _, tail = text.partition("+h:")
    h = parse_profile(tail, grid) if tail else None
    name, params = _parse_call(head)
    if name == "linear":
        if set(params) != {"kappa"}:
            raise ValueError("linear(...) takes exactly kappa")
        F = NonlinearitySpec.linear(grid, params["kappa"], h)
    elif name == "tanh":
        if set(params) != {"s"}:
            raise ValueError("tanh(...) takes exactly s")
        F = NonlinearitySpec.saturating(grid, params["s"], h)
    elif name == "forcing":
        if params:
            raise ValueError("forcing() takes no arguments")
        F = NonlinearitySpec.forcing(h if h is not None else Field(grid, np.zeros(grid.points)))
    else:
        raise ValueError(f"unknown nonlinearity family {name!r}")
    return NonlinearitySpec(F.family, F.coef, F.h, F.k, F.l, text.strip())
