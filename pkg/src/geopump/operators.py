"""Dense linear algebra for small Hilbert spaces.

Operators are plain complex ``numpy`` arrays of shape ``(dim, dim)``. The
helpers here cluster degenerate eigenvalues, build eigenspace projectors and
differentiate operator-valued maps on the torus.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import NumericalError, ValidationError

HERMITIAN_TOL = 1e-12
DEFAULT_GROUPING_TOL = 1e-8
DEFAULT_FD_STEP = 1e-5


def dagger(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose over the last two axes."""
    return np.conj(np.swapaxes(a, -1, -2))


def hermiticity_residual(h: np.ndarray) -> float:
    h = np.asarray(h)
    return float(np.max(np.abs(h - dagger(h)), initial=0.0))


def is_hermitian(h: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return hermiticity_residual(h) < tol


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Return ``a @ b - b @ a`` (broadcasts over leading axes)."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape[-2:] != b.shape[-2:] or a.shape[-1] != a.shape[-2]:
        raise ValidationError(f"commutator needs equal square operators, got {a.shape} and {b.shape}")
    return a @ b - b @ a


@dataclass(frozen=True)
class Cluster:
    """One eigenvalue cluster: mean energy, multiplicity and projector."""

    energy: float
    multiplicity: int
    projector: np.ndarray
    vectors: np.ndarray  # columns span the eigenspace


@dataclass(frozen=True)
class SpectralDecomposition:
    clusters: tuple[Cluster, ...]
    grouping_tol: float

    @property
    def dim(self) -> int:
        return self.clusters[0].projector.shape[0]

    @property
    def energies(self) -> np.ndarray:
        return np.array([c.energy for c in self.clusters])

    @property
    def multiplicities(self) -> tuple[int, ...]:
        return tuple(c.multiplicity for c in self.clusters)

    @property
    def projectors(self) -> list[np.ndarray]:
        return [c.projector for c in self.clusters]

    def reconstruct(self) -> np.ndarray:
        """Rebuild ``sum_n eps_n Pi_n``."""
        return sum(c.energy * c.projector for c in self.clusters)

    def cluster_at(self, energy: float) -> Cluster:
        """Cluster whose energy lies within ``grouping_tol`` of ``energy``."""
        for c in self.clusters:
            if abs(c.energy - energy) <= self.grouping_tol:
                return c
        raise KeyError(f"no cluster at energy {energy}")


def spectral_decompose(h: np.ndarray, grouping_tol: float = DEFAULT_GROUPING_TOL) -> SpectralDecomposition:
    """Eigendecompose a Hermitian matrix, merging near-degenerate levels.

    Sorted eigenvalues closer than ``grouping_tol`` to their neighbour are
    chained into one cluster. Projectors are assembled from the orthonormal
    eigenvectors of each cluster.

    Raises
    ------
    ValidationError
        If ``h`` is not square Hermitian within 1e-12 or ``grouping_tol <= 0``.
    NumericalError
        If the eigensolver does not converge.
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {h.shape}")
    if not grouping_tol > 0:
        raise ValidationError("grouping_tol must be positive")
    res = hermiticity_residual(h)
    if res >= HERMITIAN_TOL:
        raise ValidationError(f"operator is not Hermitian (max|H - H^dag| = {res:.3e})")
    try:
        evals, evecs = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigh failed: {exc}") from exc

    groups: list[list[int]] = [[0]]
    for i in range(1, len(evals)):
        if evals[i] - evals[i - 1] <= grouping_tol:
            groups[-1].append(i)
        else:
            groups.append([i])

    clusters = []
    for idx in groups:
        v = evecs[:, idx]
        clusters.append(Cluster(float(np.mean(evals[idx])), len(idx), v @ dagger(v), v))
    return SpectralDecomposition(tuple(clusters), float(grouping_tol))


def finite_diff_operator(
    fmap: Callable[[np.ndarray], np.ndarray],
    phi: Sequence[float],
    mu: int,
    h: float = DEFAULT_FD_STEP,
    richardson: bool = False,
) -> np.ndarray:
    """Central difference of an operator-valued map along axis ``mu``.

    With ``richardson=True`` the step-``h`` and step-``2h`` estimates are
    combined as ``(4 D_h - D_2h) / 3``, cancelling the ``h**2`` term.
    """
    if not h > 0:
        raise ValidationError("finite-difference step must be positive")
    phi = np.asarray(phi, dtype=float)
    e = np.zeros_like(phi)
    e[mu] = 1.0

    def central(step):
        return (np.asarray(fmap(phi + step * e)) - np.asarray(fmap(phi - step * e))) / (2 * step)

    d = central(h)
    if richardson:
        d = (4 * d - central(2 * h)) / 3
    return d
