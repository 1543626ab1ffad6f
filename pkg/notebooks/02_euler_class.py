# %% [markdown]
# # Curvature of the dark bundle and its Euler class
#
# The dark frame is real, so the 2x2 curvature matrix has vanishing diagonal.
# Its off-diagonal entry is the Euler form g . (d_nu g x d_mu g), and its
# integral over the torus divided by 2 pi is an even integer.

# %%
import numpy as np

from geopump import TripodModel, berry_curvature, euler_class, euler_form, wilson_loop

model = TripodModel(m=0.5)
phi = np.array([1.0, 2.0])
sample = berry_curvature(model, phi, 1, 0)
print("dark-frame curvature:\n", np.round(sample.dark_matrix, 12))
print("Euler form:", euler_form(model, phi, (1, 0)))

# %%
for m in (-3.0, -1.5, -0.5, 0.5, 1.5, 3.0):
    data = euler_class(TripodModel(m=m), axes=(1, 0), grid=(128, 128))
    print(f"m={m:+.1f}: chi_21 = {data.chi:+.9f}")

# %% [markdown]
# The gap closes at m = 0 and m = +-2 (Omega vanishes somewhere on the
# torus), which is where the class can change.

# %%
try:
    euler_class(TripodModel(m=2.0), grid=(64, 64))
except Exception as exc:
    print(type(exc).__name__, exc)

# %% [markdown]
# Around a small square loop of side a the dark block of the holonomy is
# exp(+i F a^2) up to third order in a.

# %%
from scipy.linalg import expm

u = np.stack([model.dark_frame(phi).u1, model.dark_frame(phi).u2], axis=-1)
f01 = berry_curvature(model, phi, 0, 1).dark_matrix
for a in (4e-3, 2e-3, 1e-3):
    loop = u.T @ wilson_loop(model, phi, a, axes=(0, 1), steps=50) @ u
    print(f"a={a:.0e}: residual {np.linalg.norm(loop - expm(1j * f01 * a * a)):.2e}")
