# %% [markdown]
# Spectral conventions
# ====================
#
# The transform used everywhere in bilap is the unitary one,
# phi_hat(p) = (2 pi)^{-1/2} int phi(x) e^{-ipx} dx, approximated on the
# periodic box [-L, L) by a rectangle rule evaluated with the FFT.

# %%
import numpy as np

from bilap import Field, GridSpec, SpaceTimeField, TimeGrid
from bilap.spectral import forward_ft, fourth_derivative, h4_norm, inverse_ft, l2_norm, spectral_l2_norm, w142_norm

grid = GridSpec(40.0, 1024)
print(f"dx = {grid.dx:.5f}, dp = {grid.dp:.5f}, |p| up to {np.abs(grid.p).max():.2f}")

# %%
# a Gaussian is its own transform under this normalization
u = Field(grid, np.exp(-0.5 * grid.x**2))
U = forward_ft(u)
print("max |U - e^{-p^2/2}| =", np.abs(U.coeffs - np.exp(-0.5 * grid.p**2)).max())

# %%
# Parseval and the round trip
print("L2 in x:", l2_norm(u), " L2 in p:", spectral_l2_norm(U), " pi^(1/4) =", np.pi**0.25)
print("round trip error:", np.abs(inverse_ft(U).values - u.values).max())

# %%
# the fourth derivative is the multiplier p^4; for the Gaussian it is He_4(x) e^{-x^2/2}
d4 = fourth_derivative(u).values
exact = (grid.x**4 - 6 * grid.x**2 + 3) * u.values
print("max |d4 - He4 e^{-x^2/2}| =", np.abs(d4 - exact).max())
print("H^4 norm:", h4_norm(u))

# %%
# The space-time norm adds the time derivative. For u = t e^{-x^2/2} on [0, 1]
# the exact value is sqrt(sqrt(pi) + (sqrt(pi) + 105 sqrt(pi)/16) / 3).
tg = TimeGrid(1.0, 256)
ut = SpaceTimeField.from_function(grid, tg, lambda x, t: t * np.exp(-0.5 * x**2))
sp = np.sqrt(np.pi)
print("W^{1,(4,2)}:", w142_norm(ut), " exact:", np.sqrt(sp + (sp + 105 * sp / 16) / 3))

# %%
try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    order = grid.monotone_order
    fig, ax = plt.subplots(1, 2, figsize=(9, 3))
    ax[0].plot(grid.x, u.values, label="u")
    ax[0].plot(grid.x, d4, label="u''''")
    ax[0].set_xlim(-6, 6)
    ax[0].legend()
    ax[1].semilogy(grid.p[order], np.abs(U.coeffs[order]) + 1e-300)
    ax[1].set_xlabel("p")
    fig.tight_layout()
    fig.savefig("spectral_conventions.png", dpi=100)
