"""Spectral Duhamel/Picard solver for u_t = -u_xxxx + b u_x + a u + G * F(u, x).

Modules: ``spectral`` (grid, transform convention, norms), ``catalog``
(kernels and nonlinearities), ``duhamel`` (the map tau), ``picard``
(fixed-point iteration), ``certify`` (contraction constant), ``oracles``
(independent references), ``config``/``cli`` (command line).
"""

from .catalog import (
    KernelSpec,
    NonlinearitySpec,
    convolve_with_kernel,
    eval_nonlinearity,
    kernel_g_constant,
    parse_kernel,
    parse_nonlinearity,
    verify_nonlinearity_bounds,
)
from .certify import ContractionCertificate, certify, contraction_constant, max_horizon, nontriviality_check
from .duhamel import ProblemParams, apply_semigroup, apply_tau, rhs_time_derivative, semigroup_multiplier
from .oracles import (
    OracleResult,
    check_fourier_bounds,
    exact_forcing_solution,
    exact_linear_solution,
    if_stepper_solve,
)
from .picard import SolveReport, measure_contraction_ratio, picard_solve, solve_global
from .spectral import (
    Field,
    GridSpec,
    SpaceTimeField,
    SpectralField,
    TimeGrid,
    forward_ft,
    fourth_derivative,
    h4_norm,
    inverse_ft,
    l1_norm,
    l2_norm,
    make_grid,
    w142_norm,
)

__version__ = "0.1.0"
