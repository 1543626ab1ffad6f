"""Berry curvature, Euler form and class, and Wilson lines of the dark bundle.

Axis pairs are 0-based: ``axes=(1, 0)`` selects ``(nu, mu) = (2, 1)`` in the
1-based drive labels, i.e. the Euler class chi_21.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import expm

from .drive import TorusPoint
from .errors import GapError, ValidationError
from .operators import DEFAULT_FD_STEP, commutator, dagger, finite_diff_operator
from .tripod import GROUND, TripodModel

EVEN_INTEGER_TOL = 1e-6


@dataclass(frozen=True)
class CurvatureSample:
    phi: TorusPoint
    axes: tuple[int, int]
    operator: np.ndarray
    dark_matrix: np.ndarray


@dataclass(frozen=True)
class EulerData:
    grid: tuple[int, int]
    axes: tuple[int, int]
    samples: np.ndarray
    chi: float

    @property
    def nearest_even(self) -> int:
        return int(2 * np.round(self.chi / 2))

    @property
    def residual(self) -> float:
        """Distance of chi from the nearest even integer."""
        return float(abs(self.chi - self.nearest_even))


@dataclass(frozen=True)
class WilsonLine:
    start: TorusPoint
    end: TorusPoint
    matrix: np.ndarray  # 3x3, acting on span{g1, g2, g3}

    def unitarity_residual(self) -> float:
        w = self.matrix
        return float(np.linalg.norm(dagger(w) @ w - np.eye(w.shape[0]), 2))


def _embed(v: np.ndarray) -> np.ndarray:
    out = np.zeros(v.shape[:-1] + (4,), dtype=complex)
    out[..., GROUND] = v
    return out


def dark_matrix(op: np.ndarray, u1: np.ndarray, u2: np.ndarray) -> np.ndarray:
    """Matrix elements ``<u_a| op |u_b>`` for 3-vector frames, op on 4 levels."""
    basis = np.stack([_embed(np.asarray(u1)), _embed(np.asarray(u2))], axis=-1)  # (..., 4, 2)
    return dagger(basis) @ op @ basis


def berry_curvature(model: TripodModel, phi, mu: int, nu: int, frame=None) -> CurvatureSample:
    """Non-abelian curvature ``i [dPi/dphi_mu, dPi/dphi_nu]`` of the dark band.

    Projector derivatives are analytic. ``frame`` is an optional ``(u1, u2)``
    pair for the 2x2 matrix; defaults to :meth:`TripodModel.dark_frame`.
    """
    phi = np.asarray(phi, dtype=float)
    if frame is None:
        f = model.dark_frame(phi)
        frame = (f.u1, f.u2)
    if mu == nu:
        model.check_gap(phi)
        op = np.zeros((4, 4), dtype=complex)
    else:
        op = 1j * commutator(model.d_dark_projector(phi, mu), model.d_dark_projector(phi, nu))
    return CurvatureSample(TorusPoint(*phi), (mu, nu), op, dark_matrix(op, *frame))


def projector_curvature(
    proj_map: Callable[[np.ndarray], np.ndarray], phi, mu: int, nu: int, h: float = DEFAULT_FD_STEP
) -> np.ndarray:
    """``i [dPi_mu, dPi_nu]`` with finite-difference derivatives of any projector map."""
    if mu == nu:
        p = np.asarray(proj_map(np.asarray(phi, dtype=float)))
        return np.zeros_like(p, dtype=complex)
    d_mu = finite_diff_operator(proj_map, phi, mu, h)
    d_nu = finite_diff_operator(proj_map, phi, nu, h)
    return 1j * commutator(d_mu, d_nu)


def euler_form(model: TripodModel, phi, axes: tuple[int, int] = (1, 0)) -> np.ndarray:
    """Frame-free Euler form ``g . (d_nu g x d_mu g)`` for ``axes = (nu, mu)``."""
    nu, mu = axes
    g, dg = model.bright_jet(phi)
    return np.einsum("...i,...i->...", g, np.cross(dg[..., nu, :], dg[..., mu, :]))


def local_frame_jet(model: TripodModel, phi, reference=None):
    """Dark frame built from a fixed reference vector, with analytic derivatives.

    ``u1 = normalize(r - (r.g) g)``, ``u2 = g x u1``. Smooth wherever ``r`` is
    not parallel to ``g``. The default reference is the coordinate axis on
    which ``g`` has the smallest weight at each point, which makes the frame
    agree with :meth:`TripodModel.dark_frame`.

    Returns ``(u1, u2, du1, du2)`` with derivative shape ``(..., 2, 3)``.
    """
    g, dg = model.bright_jet(phi)
    if reference is None:
        reference = np.eye(3)[np.argmin(np.abs(g), axis=-1)]
    r = np.broadcast_to(np.asarray(reference, dtype=float), g.shape)
    rg = np.sum(r * g, axis=-1)
    w = r - rg[..., None] * g
    wn = np.linalg.norm(w, axis=-1)
    u1 = w / wn[..., None]
    r_dg = np.einsum("...j,...mj->...m", r, dg)
    dw = -r_dg[..., None] * g[..., None, :] - rg[..., None, None] * dg
    u1_dw = np.einsum("...j,...mj->...m", u1, dw)
    du1 = (dw - u1_dw[..., None] * u1[..., None, :]) / wn[..., None, None]
    u2 = np.cross(g, u1)
    du2 = np.cross(dg, u1[..., None, :]) + np.cross(g[..., None, :], du1)
    return u1, u2, du1, du2


def euler_form_connection(model: TripodModel, phi, axes: tuple[int, int] = (1, 0), reference=None) -> np.ndarray:
    """Euler form from a smooth local frame: ``<d_nu u1|d_mu u2> - <d_nu u2|d_mu u1>``."""
    nu, mu = axes
    _, _, du1, du2 = local_frame_jet(model, phi, reference)
    return np.sum(du1[..., nu, :] * du2[..., mu, :], -1) - np.sum(du2[..., nu, :] * du1[..., mu, :], -1)


def torus_grid(grid: tuple[int, int]) -> np.ndarray:
    """Uniform periodic grid of shape ``(n1, n2, 2)``."""
    n1, n2 = grid
    x = 2 * np.pi * np.arange(n1) / n1
    y = 2 * np.pi * np.arange(n2) / n2
    return np.stack(np.meshgrid(x, y, indexing="ij"), axis=-1)


def euler_class(model: TripodModel, axes: tuple[int, int] = (1, 0), grid: tuple[int, int] = (128, 128)) -> EulerData:
    """Integrate the Euler form over the torus with the periodic trapezoidal rule.

    Raises :class:`GapError` naming the first grid point where ``|Omega|``
    falls below the model's gap floor.
    """
    nu, mu = axes
    if {nu, mu} != {0, 1}:
        raise ValidationError(f"axes must be a permutation of (0, 1), got {axes}")
    n1, n2 = (int(grid[0]), int(grid[1]))
    if n1 < 2 or n2 < 2:
        raise ValidationError("grid needs at least 2 points per axis")
    pts = torus_grid((n1, n2))
    model.check_gap(pts, where="on Euler-class grid")
    samples = euler_form(model, pts, axes)
    chi = float(np.sum(samples) * (2 * np.pi / n1) * (2 * np.pi / n2) / (2 * np.pi))
    return EulerData((n1, n2), (nu, mu), samples, chi)


def averaged_curvature(model: TripodModel, axes: tuple[int, int] = (1, 0), grid: tuple[int, int] = (128, 128)) -> np.ndarray:
    """Torus average of the dark-frame curvature matrix ``F^{ab}_{nu mu}``.

    Uses ``F^{12} = i Eu`` so the off-diagonal average is ``i chi / (2 pi)``;
    diagonal entries vanish for a real frame.
    """
    chi = euler_class(model, axes, grid).chi
    f12 = 1j * chi / (2 * np.pi)
    return np.array([[0.0, f12], [np.conj(f12), 0.0]], dtype=complex)


def _segment_generators(model: TripodModel, phi0, velocity, duration: float, steps: int) -> np.ndarray:
    dt = duration / steps
    mids = np.asarray(phi0, dtype=float) + ((np.arange(steps) + 0.5) * dt)[:, None] * np.asarray(velocity, dtype=float)
    model.check_gap(mids, where="along Wilson line")
    # -i * (i A) dt = A dt, real antisymmetric
    return model.kgp_coefficients(mids, velocity) * dt


def wilson_line(model: TripodModel, phi0, velocity, duration: float, steps: int = 1000) -> WilsonLine:
    """Path-ordered ``T exp(-i int A_t dt)`` along a straight torus segment.

    Midpoint rule: a product of exact exponentials, later times to the left.
    """
    phi0 = np.asarray(phi0, dtype=float)
    velocity = np.asarray(velocity, dtype=float)
    end = phi0 + duration * velocity
    w = np.eye(3, dtype=complex)
    if duration != 0 and steps > 0:
        for u in expm(_segment_generators(model, phi0, velocity, duration, steps)):
            w = u @ w
    return WilsonLine(TorusPoint(*phi0), TorusPoint(*end), w)


def wilson_loop(model: TripodModel, phi, side: float, axes: tuple[int, int] = (0, 1), steps: int = 200) -> np.ndarray:
    """Holonomy of the counterclockwise square ``+e_mu, +e_nu, -e_mu, -e_nu``."""
    mu, nu = axes
    e = np.eye(2)
    corner = np.asarray(phi, dtype=float)
    w = np.eye(3, dtype=complex)
    for direction in (e[mu], e[nu], -e[mu], -e[nu]):
        seg = wilson_line(model, corner, direction, side, steps)
        w = seg.matrix @ w
        corner = corner + side * direction
    return w


def wilczek_zee_curvature(model: TripodModel, phi, axes: tuple[int, int] = (0, 1), reference=None, h: float = 1e-4):
    """Curvature ``d_mu A_nu - d_nu A_mu - i [A_mu, A_nu]`` of the Wilczek-Zee connection.

    ``A_mu^{ab} = i <u_a | d_mu u_b>`` in the smooth reference frame; the
    outer derivatives are fourth-order central differences of the analytic
    connection. Returns ``(..., 2, 2)`` complex matrices.
    """
    mu, nu = axes
    phi = np.asarray(phi, dtype=float)
    if reference is None:
        g, _ = model.bright_jet(phi)
        reference = np.eye(3)[np.argmin(np.abs(g), axis=-1)]

    def connection(p, axis):
        u1, u2, du1, du2 = local_frame_jet(model, p, reference)
        u = np.stack([u1, u2], axis=-2)  # (..., 2, 3)
        du = np.stack([du1[..., axis, :], du2[..., axis, :]], axis=-2)
        return 1j * np.einsum("...ai,...bi->...ab", u, du)

    def d(axis_der, axis_conn):
        e = np.zeros(2)
        e[axis_der] = h
        c = lambda k: connection(phi + k * e, axis_conn)
        return (8 * (c(1) - c(-1)) - (c(2) - c(-2))) / (12 * h)

    a_mu = connection(phi, mu)
    a_nu = connection(phi, nu)
    return d(mu, nu) - d(nu, mu) - 1j * (a_mu @ a_nu - a_nu @ a_mu)
