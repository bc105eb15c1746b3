"""Property suites run by ``bilap validate``.

Each suite returns a list of :class:`~bilap.oracles.OracleResult` rows.  The
reference setup is a Gaussian kernel scaled so that g*l = 0.1, F(u) = u,
a = b = 0, T = 1 on L = 40, N = 512, M = 256.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .catalog import KernelSpec, NonlinearitySpec, kernel_g_constant, parse_nonlinearity, parse_profile
from .certify import contraction_constant
from .duhamel import ProblemParams, apply_tau
from .oracles import (
    OracleResult,
    check_fourier_bounds,
    compare_fields,
    exact_forcing_solution,
    exact_linear_solution,
    if_stepper_solve,
    random_smooth_field,
)
from .picard import measure_contraction_ratio, picard_solve
from .spectral import (
    Field,
    GridSpec,
    TimeGrid,
    forward_ft,
    fourth_derivative,
    inverse_ft,
    l2_norm,
    spectral_l2_norm,
)

SUITES = ("fourier", "bounds", "contraction", "oracles")
Q_SLACK = 1.1


@dataclass
class ReferenceSetup:
    grid: GridSpec
    timegrid: TimeGrid
    params: ProblemParams
    G: KernelSpec
    F: NonlinearitySpec
    u0: Field

    @property
    def q(self) -> float:
        g = kernel_g_constant(self.G, self.grid)
        return contraction_constant(g, self.F.l, self.params.a, self.params.b, self.timegrid.horizon)


def reference_setup(gl: float = 0.1, kappa: float = 1.0, L: float = 40.0, N: int = 512,
                    T: float = 1.0, M: int = 256) -> ReferenceSetup:
    grid = GridSpec(L, N)
    unit = KernelSpec.gaussian(sigma=1.0, amp=1.0)
    G = unit.scaled(gl / (abs(kappa) * kernel_g_constant(unit, grid)))
    F = NonlinearitySpec.linear(grid, kappa)
    u0 = Field(grid, np.exp(-0.5 * grid.x**2))
    return ReferenceSetup(grid, TimeGrid(T, M), ProblemParams(), G, F, u0)


def catalog_kernels() -> list[KernelSpec]:
    return [KernelSpec.gaussian(1.0, 1.0), KernelSpec.gaussian(2.0, 0.5),
            KernelSpec.dipole(1.0, 1.0), KernelSpec.bump(4.0, 1.0)]


def _row(name, err, tol, detail="") -> OracleResult:
    return OracleResult(name, float(err), float(err), bool(err <= tol), float(tol), detail)


def suite_fourier(seed: int = 0) -> list[OracleResult]:
    rng = np.random.default_rng(seed)
    grid = GridSpec(40.0, 1024)
    rows = []
    gauss = Field(grid, np.exp(-0.5 * grid.x**2))
    err = np.max(np.abs(forward_ft(gauss).coeffs - np.exp(-0.5 * grid.p**2)))
    rows.append(_row("gaussian_transform", err, 1e-10))
    d4 = fourth_derivative(gauss).values
    exact = (grid.x**4 - 6 * grid.x**2 + 3) * gauss.values
    rows.append(_row("fourth_derivative_gaussian", np.max(np.abs(d4 - exact)), 1e-8))
    for trial in range(5):
        f = Field(grid, rng.normal(size=grid.points))
        F = forward_ft(f)
        rel = abs(spectral_l2_norm(F) ** 2 - l2_norm(f) ** 2) / l2_norm(f) ** 2
        rows.append(_row(f"parseval[{trial}]", rel, 1e-10))
        back = inverse_ft(F).values
        rel = np.linalg.norm(back - f.values) / np.linalg.norm(f.values)
        rows.append(_row(f"round_trip[{trial}]", rel, 1e-12))
    return rows


def suite_bounds(seed: int = 0) -> list[OracleResult]:
    grid = GridSpec(40.0, 512)
    rows = [check_fourier_bounds(G, grid) for G in catalog_kernels()]
    ghat = KernelSpec.gaussian().transform(grid)
    sat = abs(np.max(np.abs(ghat)) - KernelSpec.gaussian().l1_norms(grid)[0] / np.sqrt(2 * np.pi))
    rows.append(_row("gaussian_saturates_bound", sat, 1e-9))
    return rows


def suite_contraction(seed: int = 0, pairs: int = 100) -> list[OracleResult]:
    ref = reference_setup()
    q = ref.q
    rng = np.random.default_rng(seed)
    ratios = []
    for _ in range(pairs):
        v1 = random_smooth_field(ref.grid, ref.timegrid, rng)
        v2 = random_smooth_field(ref.grid, ref.timegrid, rng)
        ratios.append(measure_contraction_ratio(v1, v2, ref.u0, ref.params, ref.G, ref.F))
    worst = max(ratios)
    rows = [OracleResult("contraction_ratio", worst, worst / q, worst <= q * Q_SLACK, q * Q_SLACK,
                         f"{pairs} pairs, certified q = {q:.6g}")]
    _, rep = picard_solve(ref.u0, ref.params, ref.G, ref.F, ref.timegrid, tol=1e-10, max_iter=25)
    rmax = rep.measured_ratio_max
    rows.append(OracleResult("picard_geometric", rmax, rmax / q, rmax <= q * Q_SLACK and rep.converged,
                             q * Q_SLACK, f"{rep.iterations} iterations"))
    return rows


def suite_oracles(seed: int = 0) -> list[OracleResult]:
    ref = reference_setup()
    grid, tg, params = ref.grid, ref.timegrid, ref.params
    rows = []
    u, _ = picard_solve(ref.u0, params, ref.G, ref.F, tg, tol=1e-10)
    rows.append(compare_fields("picard_vs_exact_linear", u,
                               exact_linear_solution(ref.u0, params, ref.G, ref.F.coef, tg), 1e-6))

    G = KernelSpec.gaussian()
    h = parse_profile("gaussian(sigma=2.0,amp=0.1)", grid)
    Ff = NonlinearitySpec.forcing(h)
    v = random_smooth_field(grid, tg, np.random.default_rng(seed))
    rows.append(compare_fields("tau_vs_exact_forcing", apply_tau(v, ref.u0, params, G, Ff),
                               exact_forcing_solution(ref.u0, params, G, h, tg), 1e-8))

    Ft = parse_nonlinearity("tanh(s=0.05)+h:gaussian(sigma=2.0,amp=0.1)", grid)
    tol = 1e-10
    w, _ = picard_solve(ref.u0, params, G, Ft, tg, tol=tol)
    rows.append(compare_fields("stepper_vs_picard_tanh", if_stepper_solve(ref.u0, params, G, Ft, tg),
                               w, max(1e-5, 10 * tol)))
    return rows


def run_suite(label: str, seed: int = 0) -> list[OracleResult]:
    table = {"fourier": suite_fourier, "bounds": suite_bounds,
             "contraction": suite_contraction, "oracles": suite_oracles}
    if label == "all":
        return [row for name in SUITES for row in table[name](seed)]
    if label not in table:
        raise ValueError(f"unknown suite {label!r}; choose from {SUITES + ('all',)}")
    return table[label](seed)
