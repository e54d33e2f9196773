"""
adz: Barron-space representations through dual Radon transforms

Numerical library and experiment driver for zonal decompositions of Barron
functions, dual-Radon and truncated-power ridge representations, random-feature
networks sampled from the dual profile, concentration bounds and the Mellin
multipliers that connect the pieces.
"""

__version__ = "0.1.0"

from .config import ADZSettings
from .exceptions import (
    ADZError,
    ConfigError,
    EnvelopeError,
    InfeasibleError,
    InfeasibleSampleCountError,
    IntegrationError,
    NumericalToleranceError,
    PoleError,
    ScheduleError,
    UnsupportedCaseError,
    ZeroNormError,
)
from .models import BoundParams, BoundReport, DensitySpec, MultiplierSpec
from .barron import DualProfile, SourceDensity, catalog_density, eval_f
from .radon import dual_radon, nalpha_eval
from .rvfl import RandomFeatureNetwork, build_density, build_network, run_trials
from .bounds import chernoff_cover_bound, covering_number, rnn_bound
from .mellin import mellin_numeric, n_multiplier

__all__ = [
    "ADZSettings",
    "ADZError",
    "ConfigError",
    "EnvelopeError",
    "InfeasibleError",
    "InfeasibleSampleCountError",
    "IntegrationError",
    "NumericalToleranceError",
    "PoleError",
    "ScheduleError",
    "UnsupportedCaseError",
    "ZeroNormError",
    "BoundParams",
    "BoundReport",
    "DensitySpec",
    "MultiplierSpec",
    "DualProfile",
    "SourceDensity",
    "catalog_density",
    "eval_f",
    "dual_radon",
    "nalpha_eval",
    "RandomFeatureNetwork",
    "build_density",
    "build_network",
    "run_trials",
    "chernoff_cover_bound",
    "covering_number",
    "rnn_bound",
    "mellin_numeric",
    "n_multiplier",
]
