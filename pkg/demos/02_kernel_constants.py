# %% [markdown]
# Kernel constants
# ================
#
# The solver needs g = sqrt(|G|_1^2 + |G''''|_1^2) for the convolution kernel.
# Both L1 norms come from closed-form derivatives, integrated on a grid that
# is refined until the sums settle.

# %%
import numpy as np
from scipy.integrate import quad

from bilap import GridSpec, KernelSpec, kernel_g_constant
from bilap.catalog import parse_nonlinearity, verify_nonlinearity_bounds
from bilap.oracles import check_fourier_bounds
from bilap.validation import catalog_kernels

grid = GridSpec(40.0, 512)

for G in catalog_kernels():
    l1, l1_4 = G.l1_norms(grid)
    print(f"{str(G):32s} |G|_1 = {l1:.6f}  |G''''|_1 = {l1_4:.6f}  g = {kernel_g_constant(G, grid):.6f}")

# %%
# cross-check the standard normal against adaptive quadrature, split at the roots of He_4
roots = np.sqrt([3 - np.sqrt(6), 3 + np.sqrt(6)])
pts = [-40, -roots[1], -roots[0], roots[0], roots[1], 40]
f = lambda x: abs((x**4 - 6 * x**2 + 3) * np.exp(-x * x / 2)) / np.sqrt(2 * np.pi)
ref = sum(quad(f, a, b, epsabs=1e-14)[0] for a, b in zip(pts[:-1], pts[1:]))
print("quad |G''''|_1 =", ref, " g =", np.hypot(1.0, ref))

# %%
# both Fourier-side bounds hold; the nonnegative Gaussian saturates the first at p = 0
for G in catalog_kernels():
    print(check_fourier_bounds(G, grid).detail)

# %%
# the nonlinearity constants are checked by random probing;
# a mislabelled Lipschitz constant is caught with a witness
F = parse_nonlinearity("tanh(s=0.3)+h:gaussian(sigma=2.0,amp=0.1)", grid)
rep = verify_nonlinearity_bounds(F, probes=2000, seed=1)
print("worst observed Lipschitz ratio", rep.worst_lipschitz_ratio, "declared", F.l)
try:
    verify_nonlinearity_bounds(F.with_constants(l=0.1), probes=500)
except ValueError as exc:
    print("rejected:", exc)
