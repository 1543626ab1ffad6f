"""Torus coordinates, linear two-tone drive protocols and phase sampling.

Phases advance as ``phi_i(t) = phi0_i + omega_i * t`` with ``omega_1 = omega``
and ``omega_2 = (p/q) * omega``. Angles are kept unreduced while integrating
and wrapped into ``[0, 2*pi)`` only when a :class:`TorusPoint` is requested.

Initial phases come from the Philox4x64 counter-based generator shipped with
numpy. Trajectory ``i`` of a run seeded with ``seed`` uses the 128-bit key
``(seed, i)`` and a zero counter, then draws ``d`` doubles with
``Generator.random``; each coordinate is that double times ``2*pi``. The
stream for a trajectory therefore depends only on ``(seed, i)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ValidationError

TWO_PI = 2.0 * np.pi
_INT64_MAX = 2**63 - 1


def wrap_angle(x):
    """Reduce angles into ``[0, 2*pi)``."""
    r = np.mod(x, TWO_PI)
    # np.mod can round up to exactly 2*pi for tiny negative inputs
    return np.where(r >= TWO_PI, 0.0, r)


@dataclass(frozen=True)
class TorusPoint:
    """A point on the d-torus with coordinates wrapped into ``[0, 2*pi)``."""

    coords: tuple[float, ...]

    def __init__(self, *coords):
        if len(coords) == 1 and np.ndim(coords[0]) == 1:
            coords = tuple(coords[0])
        wrapped = tuple(float(c) for c in wrap_angle(np.asarray(coords, dtype=float)))
        object.__setattr__(self, "coords", wrapped)

    @property
    def d(self) -> int:
        return len(self.coords)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.coords, dtype=dtype if dtype is not None else float)

    def __iter__(self):
        return iter(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def __len__(self):
        return len(self.coords)


@dataclass(frozen=True)
class TrajectoryPoint:
    t: float
    phi: TorusPoint
    velocity: np.ndarray
    angles: np.ndarray = field(repr=False)  # unreduced phi0 + omega * t


@dataclass(frozen=True)
class DriveProtocol:
    """Linear two-tone protocol on the 2-torus.

    Parameters
    ----------
    phi0 : TorusPoint or sequence of float
        Initial phases.
    omega : float
        Base frequency of drive 1.
    p, q : int
        Coprime positive integers; drive 2 runs at ``(p/q) * omega``.
    """

    phi0: TorusPoint
    omega: float
    p: int = 3
    q: int = 2

    def __post_init__(self):
        if not isinstance(self.phi0, TorusPoint):
            object.__setattr__(self, "phi0", TorusPoint(*np.atleast_1d(np.asarray(self.phi0, dtype=float))))
        if self.phi0.d != 2:
            raise ValidationError("drive protocols are two-tone (d = 2)")
        if not (np.isfinite(self.omega) and self.omega > 0):
            raise ValidationError(f"omega must be positive, got {self.omega}")
        if int(self.p) != self.p or int(self.q) != self.q or self.p < 1 or self.q < 1:
            raise ValidationError(f"ratio p/q needs positive integers, got {self.p}/{self.q}")
        if math.gcd(int(self.p), int(self.q)) != 1:
            raise ValidationError(f"p/q = {self.p}/{self.q} is not in lowest terms")

    @property
    def ratio(self) -> Fraction:
        """omega_2 / omega_1 as an exact fraction."""
        return Fraction(int(self.p), int(self.q))

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([self.omega, self.omega * self.p / self.q])

    @property
    def period(self) -> float:
        """Time after which the closed orbit returns to ``phi0``."""
        return TWO_PI * self.q / self.omega

    def angles(self, t) -> np.ndarray:
        """Unreduced phases at time(s) ``t``; shape ``t.shape + (2,)``."""
        t = np.asarray(t, dtype=float)
        return np.asarray(self.phi0)[...] + t[..., None] * self.frequencies

    def resume(self, t: float, omega: float | None = None, p: int | None = None, q: int | None = None):
        """Start a new constant-frequency segment from the phase reached at ``t``.

        Piecewise-constant frequency schedules are built by chaining segments.
        """
        return DriveProtocol(
            TorusPoint(*self.angles(t)),
            self.omega if omega is None else omega,
            self.p if p is None else p,
            self.q if q is None else q,
        )


def trajectory_eval(protocol: DriveProtocol, t: float) -> TrajectoryPoint:
    if t < 0:
        raise ValidationError("trajectory time must be non-negative")
    raw = protocol.angles(t)
    return TrajectoryPoint(float(t), TorusPoint(*raw), protocol.frequencies, raw)


def fibonacci_ratios(count: int) -> list[tuple[int, int]]:
    """Neighbouring Fibonacci pairs ``[(2, 1), (3, 2), (5, 3), ...]``.

    Pairs are capped at the signed 64-bit range.
    """
    if count < 1:
        raise ValidationError("count must be at least 1")
    out = []
    q, p = 1, 2
    for _ in range(count):
        if p > _INT64_MAX:
            raise ValidationError(f"Fibonacci pair beyond 64-bit range requested (count={count})")
        out.append((p, q))
        q, p = p, p + q
    return out


def trajectory_rng(seed: int, index: int) -> np.random.Generator:
    """Philox4x64 generator keyed by ``(seed, index)``."""
    if not 0 <= seed < 2**64:
        raise ValidationError(f"seed must be an unsigned 64-bit integer, got {seed}")
    if not 0 <= index < 2**64:
        raise ValidationError(f"trajectory index out of range: {index}")
    key = np.array([seed, index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_initial_phases(seed: int, n: int, d: int = 2) -> list[TorusPoint]:
    """Uniform initial phases on the d-torus, one Philox substream per trajectory."""
    if n < 1:
        raise ValidationError("need at least one trajectory")
    return [TorusPoint(*(TWO_PI * trajectory_rng(seed, i).random(d))) for i in range(n)]


def phases_array(points) -> np.ndarray:
    """Stack torus points into an ``(N, d)`` float array."""
    return np.array([np.asarray(p, dtype=float) for p in points], dtype=float)
