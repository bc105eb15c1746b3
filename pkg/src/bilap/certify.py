"""Explicit contraction constant, certified horizon and the support-overlap check."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .catalog import KernelSpec, NonlinearitySpec, kernel_g_constant
from .spectral import GridSpec, transform

DEFAULT_EPS = 1e-8


def contraction_constant(g: float, l: float, a: float, b: float, T: float) -> float:
    """q = g l sqrt(T^2 e^{2aT} (1 + 2 (a + |b| + 1)^2) + 2)."""
    if not g > 0:
        raise ValueError(f"g must be positive, got {g}")
    if l < 0:
        raise ValueError(f"l must be nonnegative, got {l}")
    if a < 0:
        raise ValueError(f"a must be nonnegative, got {a}")
    if T < 0:
        raise ValueError(f"T must be nonnegative, got {T}")
    if l == 0:
        return 0.0
    growth = T * T * math.exp(2.0 * a * T) * (1.0 + 2.0 * (a + abs(b) + 1.0) ** 2)
    return g * l * math.sqrt(growth + 2.0)


def max_horizon(g: float, l: float, a: float, b: float, rtol: float = 1e-10) -> float | None:
    """Largest T with q(T) < 1, or None when even T -> 0 fails (g l sqrt 2 >= 1)."""
    if not (g > 0 and l > 0):
        raise ValueError("max_horizon needs g > 0 and l > 0")
    if g * l * math.sqrt(2.0) >= 1.0:
        return None
    lo, hi = 0.0, 1.0
    while contraction_constant(g, l, a, b, hi) < 1.0:
        lo, hi = hi, 2.0 * hi
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if contraction_constant(g, l, a, b, mid) < 1.0:
            lo = mid
        else:
            hi = mid
    return lo


def nontriviality_check(G: KernelSpec, F: NonlinearitySpec, grid: GridSpec,
                        eps: float = DEFAULT_EPS) -> float:
    """dp * #{p : |FT F(0,.)(p)| > eps and |G_hat(p)| > eps}.

    A discrete proxy for the measure of the overlap of the two Fourier
    supports.  Zero means the trivial solution is not ruled out for u0 = 0.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    f0 = transform(F.at_zero().values, grid)
    gh = G.transform(grid)
    count = int(np.count_nonzero((np.abs(f0) > eps) & (np.abs(gh) > eps)))
    return count * grid.dp


@dataclass
class ContractionCertificate:
    g: float
    l: float
    a: float
    b: float
    T: float
    q: float
    certified: bool
    T_max: float | None
    support_measure: float
    eps: float

    @property
    def nontrivial(self) -> bool:
        return self.support_measure > 0

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=False)


def certify(G: KernelSpec, F: NonlinearitySpec, grid: GridSpec, a: float, b: float,
            T: float, eps: float = DEFAULT_EPS) -> ContractionCertificate:
    g = kernel_g_constant(G, grid)
    q = contraction_constant(g, F.l, a, b, T)
    T_max = max_horizon(g, F.l, a, b) if F.l > 0 else None
    return ContractionCertificate(
        g=g, l=F.l, a=a, b=b, T=T, q=q, certified=q < 1.0, T_max=T_max,
        support_measure=nontriviality_check(G, F, grid, eps), eps=eps)
