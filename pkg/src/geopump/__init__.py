"""Geometric energy pumping between two incommensurate drives of a tripod.

The dark subspace of a four-level tripod is transported without leakage by a
Kato-type counterdiabatic term. The energy it moves between the two drives
is set by the Euler class of the real dark bundle over the phase torus.
"""
from .config import ConfigError, RunConfig
from .drive import DriveProtocol, TorusPoint, fibonacci_ratios, sample_initial_phases
from .ensemble import EnsembleConfig, EnsembleStats, analytic_power, fit_slope, run_ensemble, sigma_slope_scan
from .errors import GapError, GeoPumpError, NumericalError, ValidationError
from .evolution import IntegratorConfig, PumpTrace, curvature_pump_reference, evolve_batch, evolve_pump
from .geometry import berry_curvature, euler_class, euler_form, wilczek_zee_curvature, wilson_line, wilson_loop
from .operators import SpectralDecomposition, commutator, spectral_decompose
from .tripod import InitialStateSpec, TripodModel, kgp_generic

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DriveProtocol",
    "EnsembleConfig",
    "EnsembleStats",
    "GapError",
    "GeoPumpError",
    "InitialStateSpec",
    "IntegratorConfig",
    "NumericalError",
    "PumpTrace",
    "RunConfig",
    "SpectralDecomposition",
    "TorusPoint",
    "TripodModel",
    "ValidationError",
    "analytic_power",
    "berry_curvature",
    "commutator",
    "curvature_pump_reference",
    "euler_class",
    "euler_form",
    "evolve_batch",
    "evolve_pump",
    "fibonacci_ratios",
    "fit_slope",
    "kgp_generic",
    "run_ensemble",
    "sample_initial_phases",
    "sigma_slope_scan",
    "spectral_decompose",
    "wilczek_zee_curvature",
    "wilson_line",
    "wilson_loop",
]
