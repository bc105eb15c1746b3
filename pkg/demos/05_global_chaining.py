# %% [markdown]
# Global solutions by chaining windows
# ====================================
#
# The contraction constant does not depend on the initial condition, so a
# certified window can be restarted from its own final frame indefinitely.

# %%
import numpy as np

from bilap import KernelSpec, NonlinearitySpec, ProblemParams, solve_global
from bilap.catalog import parse_profile
from bilap.oracles import exact_forcing_solution, exact_linear_solution, relative_l2_error
from bilap.picard import picard_solve
from bilap.spectral import l2_norm
from bilap.validation import reference_setup

# linear reference problem on [0, 2]: two windows of length 1 vs one of length 2
ref = reference_setup(gl=0.1, T=2.0, M=512)
one, _ = picard_solve(ref.u0, ref.params, ref.G, ref.F, ref.timegrid, tol=1e-10)
two, reports = solve_global(ref.u0, ref.params, ref.G, ref.F, 2.0, 1.0, 256, tol=1e-10)
print("windows:", len(reports), " difference:", relative_l2_error(two, one))
print("vs exact:", relative_l2_error(two, exact_linear_solution(ref.u0, ref.params, ref.G, 1.0, two.timegrid)))

# %%
# a pure source term: the transient dies out and only the mean keeps growing
grid = ref.grid
h = parse_profile("gaussian(sigma=2.0,amp=0.1)", grid)
G = KernelSpec.gaussian()
u, reports = solve_global(ref.u0, ProblemParams(), G, NonlinearitySpec.forcing(h), 8.0, 1.0, 64)
ends = [u.frame(64 * k) for k in range(9)]
print("window increments:", np.round([l2_norm(b - a) for a, b in zip(ends, ends[1:])], 5))
print("vs exact:", relative_l2_error(u, exact_forcing_solution(ref.u0, ProblemParams(), G, h, u.timegrid)))
