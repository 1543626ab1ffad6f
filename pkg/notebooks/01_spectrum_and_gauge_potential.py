# %% [markdown]
# # Tripod spectrum, dark frame and the counterdiabatic term
#
# A four-level tripod with ground states g1, g2, g3 and an excited state e.
# Two drive phases set the couplings; whatever their values, two ground-state
# combinations decouple from the light and sit at zero energy.

# %%
import numpy as np

from geopump import TripodModel, commutator, spectral_decompose

model = TripodModel(delta=1.0, m=0.5)
phi = np.array([np.pi / 3, np.pi / 4])

dec = spectral_decompose(model.hamiltonian(phi))
for c in dec.clusters:
    print(f"energy {c.energy:+.6f}  multiplicity {c.multiplicity}")
print("closed-form bright energies:", model.bright_energies(phi))

# %% [markdown]
# The dark subspace is orthogonal to |e> and to the bright direction
# g = Omega/|Omega|. A real orthonormal frame (u1, u2) with u1 x u2 = g
# spans it.

# %%
frame = model.dark_frame(phi)
print("g  =", frame.bright)
print("u1 =", frame.u1)
print("u2 =", frame.u2)
print("u1 x u2 - g:", np.abs(np.cross(frame.u1, frame.u2) - frame.bright).max())

# %% [markdown]
# The gauge potential along each drive axis generates the motion of every
# spectral projector: dPi/dphi_mu = -i [A_mu, Pi]. It has no diagonal
# blocks, so it never shifts band energies.

# %%
for mu in range(2):
    a_mu = model.kgp_axis(phi, mu)
    dark = model.dark_projector(phi)
    residual = model.d_dark_projector(phi, mu) + 1j * commutator(a_mu, dark)
    blocks = max(np.linalg.norm(p @ a_mu @ p, 2) for p in dec.projectors)
    print(f"axis {mu}: identity residual {np.abs(residual).max():.1e}, largest diagonal block {blocks:.1e}")
