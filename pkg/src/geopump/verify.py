"""Cross-module invariant checks used as a release gate.

Each check returns a :class:`CheckResult` holding the measured worst case
and the bound it is held to. :func:`run_checks` runs a named subset on a
given model; ``fault=True`` swaps in :class:`SignFlippedTripod` so the
suite can demonstrate that it notices a broken gauge potential.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .drive import DriveProtocol, sample_initial_phases
from .evolution import IntegratorConfig, curvature_pump_reference, evolve_pump
from .errors import ValidationError
from .geometry import berry_curvature, local_frame_jet, torus_grid, wilczek_zee_curvature
from .operators import commutator, spectral_decompose
from .tripod import InitialStateSpec, TripodModel

N_RANDOM_POINTS = 100
PATCH = 32
MIN_GAP = 0.05


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    bound: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: {self.value:.3e} (bound {self.bound:.0e}){' ' + self.detail if self.detail else ''}"


class SignFlippedTripod(TripodModel):
    """Tripod whose gauge-potential coefficients carry the wrong overall sign."""

    def kgp_vector(self, phi, velocity) -> np.ndarray:
        return -super().kgp_vector(phi, velocity)


def _random_gapped_points(model: TripodModel, n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    pts = []
    while len(pts) < n:
        phi = rng.uniform(0.0, 2 * np.pi, size=2)
        if model.omega_jet(phi).norm > max(MIN_GAP, model.gap_floor):
            pts.append(phi)
    return np.array(pts)


def _check(name: str, value: float, bound: float, detail: str = "") -> CheckResult:
    return CheckResult(name, bool(value < bound), float(value), bound, detail)


def check_kgp_block_offdiag(model: TripodModel, seed: int = 0) -> CheckResult:
    """Every spectral block of the gauge potential vanishes: ``Pi_n A_mu Pi_n = 0``."""
    worst = 0.0
    for phi in _random_gapped_points(model, 20, seed):
        dec = spectral_decompose(model.hamiltonian(phi))
        for mu in range(2):
            a = model.kgp_axis(phi, mu)
            for p in dec.projectors:
                worst = max(worst, np.linalg.norm(p @ a @ p, 2))
    return _check("kgp_block_offdiag", worst, 1e-8)


def check_projector_identity(model: TripodModel, seed: int = 1) -> CheckResult:
    """``dPi/dphi_mu + i [A_mu, Pi] = 0`` for the dark and bright ground projectors."""
    pts = _random_gapped_points(model, N_RANDOM_POINTS, seed)
    worst = 0.0
    dark = model.dark_projector(pts)
    bright = model.bright_projector(pts)
    for mu in range(2):
        a = model.kgp_axis(pts, mu)
        d_dark = model.d_dark_projector(pts, mu)
        for p, dp in ((dark, d_dark), (bright, -d_dark)):
            res = dp + 1j * commutator(a, p)
            worst = max(worst, float(np.max(np.linalg.norm(res, 2, axis=(-2, -1)))))
    return _check("projector_identity", worst, 1e-6, f"at {len(pts)} points")


def check_wilczek_zee(model: TripodModel) -> CheckResult:
    """Frame curvature of the connection equals the projector curvature on a grid patch."""
    pts = torus_grid((PATCH, PATCH)) + np.pi / PATCH
    pts = pts.reshape(-1, 2)
    pts = pts[model.omega_jet(pts).norm > max(MIN_GAP, model.gap_floor)]
    g, _ = model.bright_jet(pts)
    ref = np.eye(3)[np.argmin(np.abs(g), axis=-1)]
    wz = wilczek_zee_curvature(model, pts, axes=(0, 1), reference=ref)
    u1, u2, _, _ = local_frame_jet(model, pts, ref)
    worst = 0.0
    for i, phi in enumerate(pts):
        pc = berry_curvature(model, phi, 0, 1, frame=(u1[i], u2[i])).dark_matrix
        worst = max(worst, float(np.max(np.abs(wz[i] - pc))))
    return _check("wilczek_zee_equivalence", worst, 1e-6, f"{len(pts)} points")


def check_real_frame_diagonal(model: TripodModel, seed: int = 3) -> CheckResult:
    """Diagonal curvature entries vanish in a real frame."""
    worst = 0.0
    for phi in _random_gapped_points(model, N_RANDOM_POINTS, seed):
        f = berry_curvature(model, phi, 0, 1).dark_matrix
        worst = max(worst, abs(f[0, 0]), abs(f[1, 1]))
    return _check("real_frame_diagonal", worst, 1e-8)


def _reference_run(model: TripodModel, seed: int):
    phi0 = tuple(sample_initial_phases(seed, 1)[0])
    protocol = DriveProtocol(phi0, 0.4, 3, 2)
    init = InitialStateSpec()
    trace = evolve_pump(model, protocol, init, 200.0, IntegratorConfig(dt=0.01, stride=10))
    return protocol, init, trace


def check_two_path_energy(model: TripodModel, seed: int = 42) -> CheckResult:
    """Energy from the evolved state matches the Euler-form integral."""
    protocol, init, trace = _reference_run(model, seed)
    _, e_ref = curvature_pump_reference(model, protocol, init, 200.0, steps=20000)
    e_geo = e_ref[::10, 1]
    scale = float(np.max(np.abs(trace.E2)))
    diff = float(np.max(np.abs(trace.E2 - e_geo)))
    return _check("two_path_energy", diff / scale if scale else diff, 1e-4, "relative to max|E2|")


def check_transitionless(model: TripodModel, seed: int = 42) -> CheckResult:
    """The state never leaves the dark band by more than the bound."""
    _, _, trace = _reference_run(model, seed)
    return _check("transitionless_bound", float(np.max(trace.transitionless_err)), 1e-5)


CHECKS: dict[str, Callable[[TripodModel], CheckResult]] = {
    "kgp_block_offdiag": check_kgp_block_offdiag,
    "projector_identity": check_projector_identity,
    "wilczek_zee_equivalence": check_wilczek_zee,
    "real_frame_diagonal": check_real_frame_diagonal,
    "two_path_energy": check_two_path_energy,
    "transitionless_bound": check_transitionless,
}


def run_checks(names=None, model: TripodModel | None = None, fault: bool = False) -> list[CheckResult]:
    """Run the selected checks (all by default) in a fixed order."""
    if model is None:
        model = TripodModel()
    if fault:
        model = SignFlippedTripod(delta=model.delta, m=model.m, gap_floor=model.gap_floor)
    selected = list(CHECKS) if names is None else list(names)
    unknown = [n for n in selected if n not in CHECKS]
    if unknown:
        raise ValidationError(f"unknown check(s): {', '.join(unknown)}")
    return [CHECKS[n](model) for n in selected]
