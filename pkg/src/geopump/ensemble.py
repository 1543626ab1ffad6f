"""Phase-averaged pumping: ensembles over random initial phases.

Trajectories are processed in fixed blocks of :data:`BLOCK_SIZE`, optionally on
a thread pool. Block boundaries do not depend on the thread count and
reductions run in trajectory order, so results are bitwise identical for any
number of threads.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace

import numpy as np

from .drive import DriveProtocol, phases_array, sample_initial_phases
from .errors import GapError, GeoPumpError, NumericalError, ValidationError
from .evolution import BatchTrace, IntegratorConfig, evolve_batch
from .geometry import euler_class
from .tripod import InitialStateSpec, TripodModel

BLOCK_SIZE = 100
SIGMA_WINDOW_START = 0.1


@dataclass(frozen=True)
class EnsembleConfig:
    delta: float = 1.0
    m: float = 0.5
    omega: float = 0.4
    p: int = 3
    q: int = 2
    c: float = 1 / np.sqrt(2)
    dphi: float = np.pi / 2
    n_traj: int = 400
    seed: int = 42
    t_end: float = 200.0
    dt: float = 0.01
    stride: int = 10

    def __post_init__(self):
        if int(self.n_traj) != self.n_traj or self.n_traj < 2:
            raise ValidationError(f"n_traj must be an integer >= 2, got {self.n_traj}")
        # delegate the remaining checks to the component types
        self.model()
        self.initial_state()
        self.integrator()
        self.protocol((0.0, 0.0))
        if not (np.isfinite(self.t_end) and self.t_end >= 0):
            raise ValidationError("t_end must be non-negative")

    def model(self) -> TripodModel:
        return TripodModel(delta=self.delta, m=self.m)

    def initial_state(self) -> InitialStateSpec:
        return InitialStateSpec(c=self.c, dphi=self.dphi)

    def integrator(self) -> IntegratorConfig:
        return IntegratorConfig(dt=self.dt, stride=self.stride)

    def protocol(self, phi0) -> DriveProtocol:
        return DriveProtocol(phi0, self.omega, self.p, self.q)

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([self.omega, self.omega * self.p / self.q])

    def replace(self, **changes) -> "EnsembleConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class EnsembleStats:
    t: np.ndarray
    mean_energy: np.ndarray  # (S, 2)
    sigma_e2: np.ndarray  # (S,)
    slope: float  # OLS slope of the mean E2 over the full run
    sigma_slope: float  # OLS slope of sigma_E2 on [0.1 t_end, t_end]
    analytic_power: float  # phase-averaged power into drive 2
    chi: float  # Euler class chi_12
    e2: np.ndarray | None = None  # (N, S) per-trajectory E2, when kept

    @property
    def rel_err(self) -> float:
        return abs(self.slope - self.analytic_power) / abs(self.analytic_power) if self.analytic_power else float("nan")


def analytic_power(c: float, dphi: float, chi: float, omega_nu: float, omega_mu: float) -> float:
    """Phase-averaged pumping power from drive nu into drive mu.

    ``omega_nu * omega_mu * c * sqrt(1 - c^2) * sin(dphi) * chi_{nu mu} / pi``
    """
    if not 0.0 <= c <= 1.0:
        raise ValidationError(f"c must lie in [0, 1], got {c}")
    return omega_nu * omega_mu * c * np.sqrt(1.0 - c * c) * np.sin(dphi) * chi / np.pi


def fit_slope(t, y, window: tuple[float, float] | None = None) -> float:
    """Ordinary least-squares slope of ``y`` against ``t`` inside ``window``."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if window is not None:
        mask = (t >= window[0]) & (t <= window[1])
        t, y = t[mask], y[mask]
    if t.size < 2:
        raise ValidationError("slope fit needs at least two samples in the window")
    tc = t - t.mean()
    denom = np.dot(tc, tc)
    if denom == 0:
        raise ValidationError("slope fit window is degenerate (all t equal)")
    return float(np.dot(tc, y - y.mean()) / denom)


def default_threads() -> int:
    env = os.environ.get("GEOPUMP_THREADS")
    if env is None:
        return 1
    try:
        n = int(env)
    except ValueError as exc:
        raise ValidationError(f"GEOPUMP_THREADS must be an integer, got {env!r}") from exc
    if n < 1:
        raise ValidationError("GEOPUMP_THREADS must be >= 1")
    return n


def _run_block(cfg: EnsembleConfig, phases: np.ndarray, first: int) -> BatchTrace:
    model = cfg.model()
    init = cfg.initial_state()
    args = (cfg.frequencies, cfg.t_end, cfg.integrator())
    try:
        return evolve_batch(model, phases, args[0], init.state(model, phases), *args[1:])
    except GeoPumpError:
        pass
    # locate the failing trajectory for the report
    for i, phi in enumerate(phases):
        where = f"in trajectory {first + i} (phi0={tuple(float(x) for x in phi)})"
        try:
            evolve_batch(model, phi[None], args[0], init.state(model, phi[None]), *args[1:])
        except GapError as inner:
            raise GapError(inner.phi, inner.omega, inner.floor, where) from inner
        except GeoPumpError as inner:
            raise type(inner)(f"{where}: {inner}") from inner
    raise NumericalError("ensemble block failed but no single trajectory reproduces the failure")


def run_trajectories(cfg: EnsembleConfig, phases=None, threads: int | None = None) -> BatchTrace:
    """Evolve every ensemble member; returns a trace with trajectory index first."""
    if phases is None:
        phases = phases_array(sample_initial_phases(cfg.seed, cfg.n_traj))
    else:
        phases = np.asarray(phases, dtype=float).reshape(-1, 2)
        if len(phases) != cfg.n_traj:
            raise ValidationError(f"got {len(phases)} initial phases for n_traj={cfg.n_traj}")
    threads = default_threads() if threads is None else int(threads)
    if threads < 1:
        raise ValidationError("threads must be >= 1")
    starts = list(range(0, len(phases), BLOCK_SIZE))
    jobs = [(cfg, phases[s : s + BLOCK_SIZE], s) for s in starts]
    if threads == 1 or len(jobs) == 1:
        parts = [_run_block(*j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda j: _run_block(*j), jobs))
    return BatchTrace(
        t=parts[0].t,
        energy=np.concatenate([b.energy for b in parts]),
        energy_h0=np.concatenate([b.energy_h0 for b in parts]),
        transitionless_err=np.concatenate([b.transitionless_err for b in parts]),
        norm_err=np.concatenate([b.norm_err for b in parts]),
    )


def run_ensemble(cfg: EnsembleConfig, phases=None, threads: int | None = None, keep_traces: bool = False) -> EnsembleStats:
    """Phase-averaged energies, population standard deviation of E2 and fitted rates.

    ``phases`` overrides the seeded sampling (an ``(N, 2)`` array), e.g. to
    run N copies of one trajectory.
    """
    batch = run_trajectories(cfg, phases, threads)
    t = batch.t
    mean = np.mean(batch.energy, axis=0)
    e2 = batch.energy[..., 1]
    # deviations from the first member: exact zero spread for identical members
    shifted = e2 - e2[:1]
    sigma = np.sqrt(np.mean((shifted - np.mean(shifted, axis=0)) ** 2, axis=0))
    chi12 = euler_class(cfg.model(), axes=(0, 1)).chi
    w = cfg.frequencies
    power = analytic_power(cfg.c, cfg.dphi, chi12, w[0], w[1])
    if len(t) >= 2:
        slope = fit_slope(t, mean[:, 1])
        sigma_slope = fit_slope(t, sigma, (SIGMA_WINDOW_START * cfg.t_end, cfg.t_end))
    else:
        slope = sigma_slope = float("nan")
    return EnsembleStats(t, mean, sigma, slope, sigma_slope, float(power), chi12, e2 if keep_traces else None)


def sigma_slope_scan(base: EnsembleConfig, ratios, threads: int | None = None) -> list[tuple[float, float]]:
    """Linear growth rate of sigma_E2 for each frequency ratio ``(p, q)``.

    Every ratio reuses the base seed, ensemble size and fit window.
    """
    ratios = list(ratios)
    if not ratios:
        raise ValidationError("ratio list is empty")
    out = []
    for p, q in ratios:
        stats = run_ensemble(base.replace(p=int(p), q=int(q)), threads=threads)
        out.append((p / q, stats.sigma_slope))
    return out
