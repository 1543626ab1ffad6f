"""Tripod Hamiltonian with two-tone Rabi couplings.

Basis order is ``(g1, g2, g3, e)``. The couplings are

    Omega_1 = m - cos(phi1) - cos(phi2),  Omega_2 = sin(phi1),  Omega_3 = sin(phi2)

and ``H0 = Delta |e><e| + sum_i Omega_i (|e><g_i| + |g_i><e|)``. Its kernel
is a doubly degenerate dark subspace orthogonal to ``|e>`` and to the bright
direction ``g = Omega / |Omega|``.

All model methods broadcast over a leading batch of torus points: ``phi``
has shape ``(..., 2)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import GapError, NumericalError, ValidationError
from .operators import DEFAULT_FD_STEP, DEFAULT_GROUPING_TOL, commutator, finite_diff_operator, spectral_decompose

DIM = 4
EXCITED = 3
GROUND = slice(0, 3)


@dataclass(frozen=True)
class OmegaJet:
    """Couplings with first and second partial derivatives.

    Shapes: ``omega`` (..., 3), ``d_omega`` (..., 2, 3) indexed ``[mu, j]``,
    ``dd_omega`` (..., 2, 2, 3) indexed ``[mu, nu, j]``.
    """

    omega: np.ndarray
    d_omega: np.ndarray
    dd_omega: np.ndarray
    norm: np.ndarray
    gapped: np.ndarray | bool


@dataclass(frozen=True)
class DarkFrame:
    bright: np.ndarray
    u1: np.ndarray
    u2: np.ndarray


@dataclass(frozen=True)
class TripodModel:
    """Two-tone tripod model.

    Parameters
    ----------
    delta : float
        One-photon detuning of ``|e>``.
    m : float
        Mass parameter of the two-tone couplings; the Euler class is
        ``+-2`` for ``0 < |m| < 2`` and zero for ``|m| > 2``.
    gap_floor : float
        Smallest admissible ``|Omega|``.
    """

    delta: float = 1.0
    m: float = 0.5
    gap_floor: float = 1e-3

    def __post_init__(self):
        if not (np.isfinite(self.delta) and np.isfinite(self.m)):
            raise ValidationError("delta and m must be finite")
        if not self.gap_floor > 0:
            raise ValidationError("gap_floor must be positive")

    # -- couplings -----------------------------------------------------

    def omega_jet(self, phi) -> OmegaJet:
        phi = np.asarray(phi, dtype=float)
        p1, p2 = phi[..., 0], phi[..., 1]
        s1, c1, s2, c2 = np.sin(p1), np.cos(p1), np.sin(p2), np.cos(p2)
        zero = np.zeros_like(p1)
        omega = np.stack([self.m - c1 - c2, s1, s2], axis=-1)
        d_omega = np.stack([np.stack([s1, c1, zero], -1), np.stack([s2, zero, c2], -1)], axis=-2)
        dd_omega = np.zeros(p1.shape + (2, 2, 3))
        dd_omega[..., 0, 0, :] = np.stack([c1, -s1, zero], -1)
        dd_omega[..., 1, 1, :] = np.stack([c2, zero, -s2], -1)
        norm = np.sqrt(np.sum(omega**2, axis=-1))
        gapped = norm > self.gap_floor
        if gapped.ndim == 0:
            gapped = bool(gapped)
        return OmegaJet(omega, d_omega, dd_omega, norm, gapped)

    def check_gap(self, phi, where: str = "") -> OmegaJet:
        """Return the jet at ``phi``; raise :class:`GapError` at the first gapless point."""
        jet = self.omega_jet(phi)
        bad = ~np.asarray(jet.gapped)
        if np.any(bad):
            idx = tuple(np.argwhere(bad)[0])
            raise GapError(np.asarray(phi, dtype=float)[idx], jet.norm[idx], self.gap_floor, where)
        return jet

    # -- Hamiltonian ---------------------------------------------------

    def hamiltonian(self, phi) -> np.ndarray:
        omega = self.omega_jet(phi).omega
        h = np.zeros(omega.shape[:-1] + (DIM, DIM), dtype=complex)
        h[..., EXCITED, EXCITED] = self.delta
        h[..., EXCITED, GROUND] = omega
        h[..., GROUND, EXCITED] = omega
        return h

    def dh0(self, phi, mu: int) -> np.ndarray:
        """Analytic ``dH0/dphi_mu``; only the coupling entries vary."""
        d = self.omega_jet(phi).d_omega[..., mu, :]
        out = np.zeros(d.shape[:-1] + (DIM, DIM), dtype=complex)
        out[..., EXCITED, GROUND] = d
        out[..., GROUND, EXCITED] = d
        return out

    def bright_energies(self, phi) -> tuple[np.ndarray, np.ndarray]:
        """``eps_pm = (Delta +- sqrt(Delta^2 + 4 Omega^2)) / 2``."""
        om = self.omega_jet(phi).norm
        root = np.sqrt(self.delta**2 + 4 * om**2)
        return (self.delta - root) / 2, (self.delta + root) / 2

    # -- bright / dark geometry ----------------------------------------

    def bright_jet(self, phi) -> tuple[np.ndarray, np.ndarray]:
        """Unit bright vector ``g`` (..., 3) and ``dg/dphi_mu`` (..., 2, 3)."""
        jet = self.check_gap(phi)
        n = jet.norm[..., None]
        g = jet.omega / n
        proj = np.einsum("...j,...mj->...m", g, jet.d_omega)
        dg = (jet.d_omega - proj[..., None] * g[..., None, :]) / n[..., None]
        return g, dg

    def bright_projector(self, phi) -> np.ndarray:
        """``|g><g|`` embedded in the 4-level space."""
        g, _ = self.bright_jet(phi)
        out = np.zeros(g.shape[:-1] + (DIM, DIM), dtype=complex)
        out[..., GROUND, GROUND] = g[..., :, None] * g[..., None, :]
        return out

    def dark_projector(self, phi) -> np.ndarray:
        p = self.bright_projector(phi)
        out = -p
        idx = np.arange(3)
        out[..., idx, idx] += 1.0
        return out

    def d_dark_projector(self, phi, mu: int) -> np.ndarray:
        """Analytic ``dPi_dark/dphi_mu = -(dg g^T + g dg^T)``."""
        g, dg = self.bright_jet(phi)
        d = dg[..., mu, :]
        out = np.zeros(g.shape[:-1] + (DIM, DIM), dtype=complex)
        out[..., GROUND, GROUND] = -(d[..., :, None] * g[..., None, :] + g[..., :, None] * d[..., None, :])
        return out

    def dark_frame(self, phi) -> DarkFrame:
        """Pointwise real frame ``(u1, u2)`` of the dark subspace with ``u1 x u2 = g``.

        ``u1`` is the Gram-Schmidt image of the coordinate axis on which ``g``
        has the smallest weight (lowest index on ties). The frame is only
        locally smooth; it jumps where that axis switches.
        """
        g, _ = self.bright_jet(phi)
        k = np.argmin(np.abs(g), axis=-1)
        axis = np.eye(3)[k]
        w = axis - np.sum(axis * g, axis=-1, keepdims=True) * g
        u1 = w / np.linalg.norm(w, axis=-1, keepdims=True)
        u2 = np.cross(g, u1)
        return DarkFrame(g, u1, u2)

    # -- Kato gauge potential ------------------------------------------

    def kgp_vector(self, phi, velocity) -> np.ndarray:
        """Gauge-potential coefficients as the 3-vector ``(A_23, A_31, A_12)``."""
        return kgp_vector(self.check_gap(phi), velocity)

    def kgp_coefficients(self, phi, velocity) -> np.ndarray:
        """Real antisymmetric ``A_jk = (dOmega_j Omega_k - dOmega_k Omega_j) / Omega^2``.

        ``dOmega_j = sum_mu velocity_mu dOmega_j/dphi_mu`` is the rate of change
        along the trajectory.
        """
        return skew(self.kgp_vector(phi, velocity))

    def kgp_projected(self, phi, velocity) -> np.ndarray:
        """Counterdiabatic term ``i sum_jk A_jk |g_j><g_k|`` with a zero ``e`` row/column."""
        a = self.kgp_coefficients(phi, velocity)
        out = np.zeros(a.shape[:-2] + (DIM, DIM), dtype=complex)
        out[..., GROUND, GROUND] = 1j * a
        return out

    def kgp_axis(self, phi, mu: int) -> np.ndarray:
        """Gauge potential component along coordinate ``mu`` (unit velocity)."""
        v = np.zeros(2)
        v[mu] = 1.0
        return self.kgp_projected(phi, v)

    def kgp_derivative_coefficients(self, phi, velocity, mu: int) -> np.ndarray:
        """``d A_jk / dphi_mu`` at fixed velocity, from analytic second derivatives."""
        return skew(kgp_vector_derivative(self.check_gap(phi), velocity, mu))

    def kgp_derivative(self, phi, velocity, mu: int) -> np.ndarray:
        a = self.kgp_derivative_coefficients(phi, velocity, mu)
        out = np.zeros(a.shape[:-2] + (DIM, DIM), dtype=complex)
        out[..., GROUND, GROUND] = 1j * a
        return out


def skew(a: np.ndarray) -> np.ndarray:
    """Antisymmetric matrix with ``M_23 = a_1, M_31 = a_2, M_12 = a_3``."""
    a = np.asarray(a)
    out = np.zeros(a.shape[:-1] + (3, 3), dtype=a.dtype)
    out[..., 1, 2], out[..., 2, 1] = a[..., 0], -a[..., 0]
    out[..., 2, 0], out[..., 0, 2] = a[..., 1], -a[..., 1]
    out[..., 0, 1], out[..., 1, 0] = a[..., 2], -a[..., 2]
    return out


def cross3(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Cross product over the last axis; cheaper than ``np.cross`` on large stacks."""
    a0, a1, a2 = a[..., 0], a[..., 1], a[..., 2]
    b0, b1, b2 = b[..., 0], b[..., 1], b[..., 2]
    return np.stack([a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0], axis=-1)


def kgp_vector(jet: OmegaJet, velocity) -> np.ndarray:
    """``(rate x Omega) / Omega^2``, the vector form of the coefficient matrix."""
    rate = np.einsum("...m,...mj->...j", np.asarray(velocity, dtype=float), jet.d_omega)
    return cross3(rate, jet.omega) / (jet.norm**2)[..., None]


def kgp_vector_derivative(jet: OmegaJet, velocity, mu: int) -> np.ndarray:
    """Partial derivative of :func:`kgp_vector` along ``phi_mu`` at fixed velocity."""
    v = np.asarray(velocity, dtype=float)
    om = jet.omega
    d_om = jet.d_omega[..., mu, :]
    rate = np.einsum("...m,...mj->...j", v, jet.d_omega)
    d_rate = np.einsum("...n,...nj->...j", v, jet.dd_omega[..., mu, :, :])
    n2 = (jet.norm**2)[..., None]
    dn2 = 2 * np.sum(om * d_om, axis=-1)[..., None]
    return (cross3(d_rate, om) + cross3(rate, d_om)) / n2 - cross3(rate, om) * dn2 / n2**2


@dataclass(frozen=True)
class InitialStateSpec:
    """Dark-subspace superposition ``c e^{i dphi} u1 + sqrt(1 - c^2) u2``."""

    c: float = 1 / np.sqrt(2)
    dphi: float = np.pi / 2

    def __post_init__(self):
        if not 0.0 <= self.c <= 1.0:
            raise ValidationError(f"amplitude c must lie in [0, 1], got {self.c}")
        if not -np.pi < self.dphi <= np.pi:
            raise ValidationError(f"relative phase must lie in (-pi, pi], got {self.dphi}")

    @property
    def coefficients(self) -> tuple[complex, complex]:
        return self.c * np.exp(1j * self.dphi), complex(np.sqrt(1.0 - self.c**2))

    @property
    def coherence(self) -> float:
        """``-2 Im(c1* c2) = 2 c sqrt(1 - c^2) sin(dphi)``."""
        c1, c2 = self.coefficients
        return float(-2.0 * np.imag(np.conj(c1) * c2))

    def state(self, model: TripodModel, phi0) -> np.ndarray:
        """Four-component state prepared in the pointwise dark frame at ``phi0``."""
        frame = model.dark_frame(phi0)
        c1, c2 = self.coefficients
        psi = np.zeros(np.shape(frame.u1)[:-1] + (DIM,), dtype=complex)
        psi[..., GROUND] = c1 * frame.u1 + c2 * frame.u2
        return psi


def kgp_generic_axis(
    h_map: Callable[[np.ndarray], np.ndarray],
    phi,
    mu: int,
    h: float = DEFAULT_FD_STEP,
    grouping_tol: float = DEFAULT_GROUPING_TOL,
) -> np.ndarray:
    """``A_mu = (i/2) sum_n [dPi_n, Pi_n]`` for an arbitrary Hermitian family.

    Projector derivatives are central differences; the cluster structure must
    be the same at ``phi +- h e_mu``.
    """
    phi = np.asarray(phi, dtype=float)
    centre = spectral_decompose(h_map(phi), grouping_tol)
    e = np.zeros_like(phi)
    e[mu] = h
    plus = spectral_decompose(h_map(phi + e), grouping_tol)
    minus = spectral_decompose(h_map(phi - e), grouping_tol)
    if not (plus.multiplicities == minus.multiplicities == centre.multiplicities):
        raise NumericalError(
            f"eigenvalue clusters change across the stencil at phi={tuple(phi)} along axis {mu}: "
            f"{minus.multiplicities} / {centre.multiplicities} / {plus.multiplicities}"
        )
    out = np.zeros_like(centre.clusters[0].projector)
    for cp, cm, c0 in zip(plus.clusters, minus.clusters, centre.clusters):
        d_pi = (cp.projector - cm.projector) / (2 * h)
        out = out + commutator(d_pi, c0.projector)
    return 0.5j * out


def kgp_generic(
    h_map: Callable[[np.ndarray], np.ndarray],
    phi,
    velocity,
    h: float = DEFAULT_FD_STEP,
    grouping_tol: float = DEFAULT_GROUPING_TOL,
) -> np.ndarray:
    """``A_t = sum_mu velocity_mu A_mu`` for an arbitrary Hermitian family."""
    v = np.asarray(velocity, dtype=float)
    out = 0
    for mu, vm in enumerate(v):
        if vm != 0:
            out = out + vm * kgp_generic_axis(h_map, phi, mu, h, grouping_tol)
    if np.isscalar(out):
        d = np.asarray(h_map(np.asarray(phi, dtype=float))).shape[0]
        return np.zeros((d, d), dtype=complex)
    return out


def projector_derivative_fd(proj_map, phi, mu: int, h: float = DEFAULT_FD_STEP) -> np.ndarray:
    """Central-difference derivative of a projector-valued map."""
    return finite_diff_operator(proj_map, phi, mu, h)
