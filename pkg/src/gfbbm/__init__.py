"""
gfBBM solver.

Уединённые волны обобщённого дробного уравнения Бенджамина-Бона-Махони
итерацией Петвиашвили и их эволюция псевдоспектральным методом.
"""

__version__ = "1.0.0"

from gfbbm.spectral import (
    SpectralGrid,
    WaveProfile,
    Spectrum,
    make_grid,
    forward_transform,
    inverse_transform,
    apply_fractional,
    apply_x_derivative,
)
from gfbbm.models import (
    ModelParams,
    SolverConfig,
    TimeGrid,
    RunConfig,
    AdmissibilityTag,
    AdmissibilityReport,
    ResultManifest,
)
from gfbbm.model import residual_operator, conserved_quantities
from gfbbm.petviashvili import SolverResult, solve, default_seed
from gfbbm.evolution import EvolutionTrace, evolve
from gfbbm.theory import validate_params, exact_soliton
from gfbbm.runner import ExperimentRunner
from gfbbm.exceptions import (
    GfbbmError,
    ConfigurationError,
    ParameterError,
    InadmissibleParametersError,
    NumericalError,
    DivergenceError,
)

__all__ = [
    # Spectral
    "SpectralGrid",
    "WaveProfile",
    "Spectrum",
    "make_grid",
    "forward_transform",
    "inverse_transform",
    "apply_fractional",
    "apply_x_derivative",
    # Models
    "ModelParams",
    "SolverConfig",
    "TimeGrid",
    "RunConfig",
    "AdmissibilityTag",
    "AdmissibilityReport",
    "ResultManifest",
    # Solvers
    "residual_operator",
    "conserved_quantities",
    "SolverResult",
    "solve",
    "default_seed",
    "EvolutionTrace",
    "evolve",
    "validate_params",
    "exact_soliton",
    "ExperimentRunner",
    # Exceptions
    "GfbbmError",
    "ConfigurationError",
    "ParameterError",
    "InadmissibleParametersError",
    "NumericalError",
    "DivergenceError",
]
