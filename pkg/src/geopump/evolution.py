"""Transitionless evolution under ``H0 + A_t`` with per-drive energy accounting.

The state is integrated in the full four-level space with classical RK4 at a
fixed step. Pumped energies are carried as extra ODE components,

    dE_mu/dt   = phidot_mu <psi| dA_t/dphi_mu |psi>
    dE'_mu/dt  = phidot_mu <psi| dH0/dphi_mu |psi>

so their RK4 update is Simpson's rule over each step, evaluated on the same
stage states as the wavefunction. ``dA_t/dphi_mu`` is assembled from the
analytic second derivatives of the couplings.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson

from .drive import DriveProtocol
from .errors import ValidationError
from .geometry import euler_form
from .tripod import EXCITED, GROUND, InitialStateSpec, TripodModel, cross3, kgp_vector, kgp_vector_derivative, skew

STABILITY_LIMIT = 0.1
_CHUNK_BUDGET = 20000  # (steps x trajectories) evaluated per vectorised chunk
_STEP_MATRIX_MAX_BATCH = 32  # below this, per-step Python overhead dominates
_STAGE_TIME = np.array([0, 1, 1, 2])
_SIMPSON = np.array([1.0, 2.0, 2.0, 1.0]) / 6.0


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed-step RK4 settings.

    ``dt`` is the nominal step; when ``t_end`` is not a multiple of it the
    step is shrunk uniformly so the grid ends exactly at ``t_end``.
    """

    dt: float = 0.01
    stride: int = 1

    def __post_init__(self):
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ValidationError(f"dt must be positive, got {self.dt}")
        if int(self.stride) != self.stride or self.stride < 1:
            raise ValidationError(f"output stride must be a positive integer, got {self.stride}")

    def grid(self, t_end: float) -> tuple[int, float]:
        """Number of steps and the actual step for a run ending at ``t_end``."""
        if not (np.isfinite(t_end) and t_end >= 0):
            raise ValidationError(f"t_end must be non-negative, got {t_end}")
        if t_end == 0:
            return 0, self.dt
        n = int(np.ceil(t_end / self.dt - 1e-9))
        return n, t_end / n


@dataclass(frozen=True)
class PumpTrace:
    """Sampled single-trajectory run.

    ``energy[:, mu]`` is the energy pumped into drive ``mu + 1`` by the
    gauge-potential term and ``energy_h0[:, mu]`` the H0 channel.
    """

    t: np.ndarray
    psi: np.ndarray
    energy: np.ndarray
    energy_h0: np.ndarray
    transitionless_err: np.ndarray
    norm_err: np.ndarray

    @property
    def E1(self):
        return self.energy[:, 0]

    @property
    def E2(self):
        return self.energy[:, 1]


@dataclass(frozen=True)
class BatchTrace:
    """Many trajectories on a shared time grid; trajectory index first."""

    t: np.ndarray
    energy: np.ndarray  # (N, S, 2)
    energy_h0: np.ndarray  # (N, S, 2)
    transitionless_err: np.ndarray  # (N, S)
    norm_err: np.ndarray  # (N, S)
    psi: np.ndarray | None = None  # (N, S, 4)


def _sample_steps(n: int, stride: int) -> np.ndarray:
    idx = np.arange(0, n + 1, stride)
    if idx[-1] != n:
        idx = np.append(idx, n)
    return idx


def _leakage(model: TripodModel, phi, psi) -> np.ndarray:
    g, _ = model.bright_jet(phi)
    bright = np.einsum("...j,...j->...", g, psi[..., GROUND])
    return np.sqrt(np.abs(psi[..., EXCITED]) ** 2 + np.abs(bright) ** 2)


def _rk4_stages(k_op: np.ndarray, psi: np.ndarray, h: float):
    """Classic RK4 over one chunk; returns stage states and end-of-step states."""
    steps = (k_op.shape[0] - 1) // 2
    stages = np.empty((steps, 4) + psi.shape, dtype=complex)
    states = np.empty((steps,) + psi.shape, dtype=complex)
    for j in range(steps):
        ka, kb, kc = k_op[2 * j], k_op[2 * j + 1], k_op[2 * j + 2]
        k1 = np.einsum("nij,nj->ni", ka, psi)
        y2 = psi + (0.5 * h) * k1
        k2 = np.einsum("nij,nj->ni", kb, y2)
        y3 = psi + (0.5 * h) * k2
        k3 = np.einsum("nij,nj->ni", kb, y3)
        y4 = psi + h * k3
        k4 = np.einsum("nij,nj->ni", kc, y4)
        stages[j, 0] = psi
        stages[j, 1] = y2
        stages[j, 2] = y3
        stages[j, 3] = y4
        psi = psi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        states[j] = psi
    return stages, states


def _rk4_step_matrices(k_op: np.ndarray, psi: np.ndarray, h: float):
    """Same scheme as :func:`_rk4_stages`, cheaper for very small batches.

    The ODE is linear, so stage ``k`` of step ``j`` is ``S_k psi_j`` and the
    step itself is a fixed matrix ``R_j``. All maps are built at once; only
    ``psi_{j+1} = R_j psi_j`` runs sequentially.
    """
    ka, kb, kc = k_op[0:-1:2], k_op[1::2], k_op[2::2]
    eye = np.eye(4)
    s2 = eye + (0.5 * h) * ka
    kb_s2 = kb @ s2
    s3 = eye + (0.5 * h) * kb_s2
    kb_s3 = kb @ s3
    s4 = eye + h * kb_s3
    step = eye + (h / 6.0) * (ka + 2.0 * kb_s2 + 2.0 * kb_s3 + kc @ s4)

    starts = np.empty(step.shape[:2] + (4, 1), dtype=complex)
    col = psi[..., None]
    for j in range(step.shape[0]):
        starts[j] = col
        col = step[j] @ col
    states = np.concatenate([starts[1:], col[None]])[..., 0]
    stages = np.stack([starts, s2 @ starts, s3 @ starts, s4 @ starts], axis=1)[..., 0]
    return stages, states


def evolve_batch(
    model: TripodModel,
    phi0: np.ndarray,
    frequencies,
    psi0: np.ndarray,
    t_end: float,
    cfg: IntegratorConfig = IntegratorConfig(),
    keep_states: bool = False,
) -> BatchTrace:
    """Integrate ``N`` trajectories ``phi0[i] + frequencies * t`` side by side.

    Parameters
    ----------
    phi0 : (N, 2) array
        Initial phases, unreduced values are fine.
    psi0 : (N, 4) complex array
        Initial states.
    """
    phi0 = np.atleast_2d(np.asarray(phi0, dtype=float))
    freqs = np.asarray(frequencies, dtype=float)
    psi = np.array(np.atleast_2d(psi0), dtype=complex)
    n_traj = phi0.shape[0]
    n, h = cfg.grid(t_end)
    samples = _sample_steps(n, cfg.stride)
    slot = {int(k): i for i, k in enumerate(samples)}

    model.check_gap(phi0, where="at t=0")
    out_energy = np.zeros((len(samples), n_traj, 4))
    out_psi = np.zeros((len(samples), n_traj, 4), dtype=complex)
    out_psi[0] = psi
    energy = np.zeros((n_traj, 4))
    chunk = max(1, _CHUNK_BUDGET // n_traj)

    for start in range(0, n, chunk):
        steps = min(chunk, n - start)
        times = (start + np.arange(2 * steps + 1) / 2.0) * h
        phis = phi0[None, :, :] + times[:, None, None] * freqs
        jet = model.check_gap(phis, where="along trajectory")
        a = kgp_vector(jet, freqs)

        # spectral norm of a real 3x3 antisymmetric matrix is the norm of its vector
        scale = max(abs(model.delta), float(np.max(jet.norm)), float(np.max(np.linalg.norm(a, axis=-1))))
        if h * scale >= STABILITY_LIMIT:
            raise ValidationError(
                f"step too large: dt * max(Delta, Omega, |A|) = {h * scale:.3g} >= {STABILITY_LIMIT}"
            )

        # generator K = -i (H0 + i A) = -i H0 + A
        k_op = np.zeros(phis.shape[:-1] + (4, 4), dtype=complex)
        k_op[..., GROUND, GROUND] = skew(a)
        k_op[..., EXCITED, EXCITED] = -1j * model.delta
        k_op[..., EXCITED, GROUND] = -1j * jet.omega
        k_op[..., GROUND, EXCITED] = -1j * jet.omega

        if n_traj <= _STEP_MATRIX_MAX_BATCH:
            stages, states = _rk4_step_matrices(k_op, psi, h)
        else:
            stages, states = _rk4_stages(k_op, psi, h)
        psi = states[-1]

        # instantaneous powers on every RK stage
        tidx = 2 * np.arange(steps)[:, None] + _STAGE_TIME  # (steps, 4)
        yg = stages[..., GROUND]
        # Re <y| i dA |y> = -dA_vec . Im(conj(y) x y), and Im(conj(y) x y) = 2 Re y x Im y
        im_cross = 2.0 * cross3(yg.real, yg.imag)
        cross_e = np.conj(stages[..., EXCITED])[..., None] * yg
        powers = np.empty((steps, 4, n_traj, 4))
        for mu in range(2):
            d_a = kgp_vector_derivative(jet, freqs, mu)[tidx]
            powers[..., mu] = -freqs[mu] * np.sum(d_a * im_cross, axis=-1)
            d_om = jet.d_omega[..., mu, :][tidx]
            powers[..., 2 + mu] = 2.0 * freqs[mu] * np.real(np.sum(d_om * cross_e, axis=-1))
        increments = h * np.einsum("s,jsnc->jnc", _SIMPSON, powers)
        running = energy + np.cumsum(increments, axis=0)
        energy = running[-1]

        for j in range(steps):
            k = start + j + 1
            if k in slot:
                out_energy[slot[k]] = running[j]
                out_psi[slot[k]] = states[j]

    t = samples * h if n else np.zeros(1)
    phi_s = phi0[None, :, :] + t[:, None, None] * freqs
    leak = _leakage(model, phi_s, out_psi)
    norm_err = np.abs(np.linalg.norm(out_psi, axis=-1) - 1.0)
    return BatchTrace(
        t=t,
        energy=np.ascontiguousarray(out_energy[..., :2].transpose(1, 0, 2)),
        energy_h0=np.ascontiguousarray(out_energy[..., 2:].transpose(1, 0, 2)),
        transitionless_err=np.ascontiguousarray(leak.T),
        norm_err=np.ascontiguousarray(norm_err.T),
        psi=np.ascontiguousarray(out_psi.transpose(1, 0, 2)) if keep_states else None,
    )


def evolve_pump(
    model: TripodModel,
    protocol: DriveProtocol,
    init: InitialStateSpec,
    t_end: float,
    cfg: IntegratorConfig = IntegratorConfig(),
) -> PumpTrace:
    """Run one trajectory prepared in the dark frame at ``protocol.phi0``."""
    phi0 = np.asarray(protocol.phi0)
    psi0 = init.state(model, phi0)
    b = evolve_batch(model, phi0[None], protocol.frequencies, psi0[None], t_end, cfg, keep_states=True)
    return PumpTrace(b.t, b.psi[0], b.energy[0], b.energy_h0[0], b.transitionless_err[0], b.norm_err[0])


def pump_power(psi, model: TripodModel, phi, velocity, mu: int) -> float:
    """Instantaneous power ``phidot_mu <psi| dA_t/dphi_mu |psi>`` into drive ``mu``."""
    psi = np.asarray(psi, dtype=complex)
    d_a = model.kgp_derivative(phi, velocity, mu)
    return float(np.asarray(velocity, dtype=float)[mu] * np.real(np.conj(psi) @ d_a @ psi))


def pump_power_h0(psi, model: TripodModel, phi, velocity, mu: int) -> float:
    """``phidot_mu <psi| dH0/dphi_mu |psi>``; vanishes on the dark band."""
    psi = np.asarray(psi, dtype=complex)
    return float(np.asarray(velocity, dtype=float)[mu] * np.real(np.conj(psi) @ model.dh0(phi, mu) @ psi))


def transitionless_error(psi, model: TripodModel, phi) -> float:
    """Norm of the component of ``psi`` outside the dark subspace at ``phi``."""
    psi = np.asarray(psi, dtype=complex)
    leak = psi - model.dark_projector(phi) @ psi
    return float(np.linalg.norm(leak))


def curvature_pump_reference(
    model: TripodModel,
    protocol: DriveProtocol,
    init: InitialStateSpec,
    t_end: float,
    steps: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Pumped energies from the Euler form alone, without evolving a state.

    ``E_mu(t) = -2 Im(c1* c2) sum_{nu != mu} int_0^t phidot_nu phidot_mu Eu_{nu mu} ds``
    integrated with cumulative Simpson on ``steps`` uniform intervals
    (default: one per 0.01 time units). Returns ``(t, E)`` with ``E`` of
    shape ``(steps + 1, 2)``.
    """
    if t_end < 0:
        raise ValidationError("t_end must be non-negative")
    if t_end == 0:
        return np.zeros(1), np.zeros((1, 2))
    if steps is None:
        steps = max(2, int(np.ceil(t_end / 0.01)))
    t = np.linspace(0.0, t_end, steps + 1)
    phis = protocol.angles(t)
    model.check_gap(phis, where="along trajectory")
    w = protocol.frequencies
    eu = euler_form(model, phis, axes=(1, 0))  # Eu_21; Eu_12 = -Eu_21
    rates = init.coherence * w[0] * w[1] * np.stack([eu, -eu], axis=-1)
    energy = cumulative_simpson(rates, x=t, axis=0, initial=0.0)
    return t, energy
