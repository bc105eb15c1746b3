# %% [markdown]
# Contraction certificate
# =======================
#
# q(T) = g l sqrt(T^2 e^{2aT} (1 + 2 (a + |b| + 1)^2) + 2) must stay below one.
# The largest certified horizon is found by bisection.

# %%
import math

import numpy as np

from bilap import Field, GridSpec, KernelSpec, NonlinearitySpec, certify
from bilap.certify import contraction_constant, max_horizon

for gl, a, b in [(0.1, 0, 0), (0.1, 0, 1), (0.1, 0.5, 0), (0.3, 0, 0), (0.8, 0, 0)]:
    T = max_horizon(1.0, gl, a, b)
    print(f"gl={gl} a={a} b={b}: T_max = {T}")
print("analytic:", math.sqrt(98 / 3), math.sqrt(98 / 9))

# %%
Ts = np.linspace(0, 8, 9)
print(np.round([contraction_constant(1.0, 0.1, 0, 0, T) for T in Ts], 4))

# %%
# a full certificate, including the Fourier-support overlap of F(0, .) and G
grid = GridSpec(40.0, 512)
h = Field(grid, 0.1 * np.exp(-grid.x**2 / 8))
F = NonlinearitySpec.saturating(grid, 0.1, h)
G = KernelSpec.gaussian().scaled(0.5)
print(certify(G, F, grid, a=0.0, b=0.0, T=1.0).to_json())
