"""Natural second-order spiral splines through timed planar waypoints."""

from .errors import SpiralSplineError
from .estimator import all_sigmas, estimate, index_from_sigma, sigma_from_index
from .geometry import (
    AngleSpline,
    InterpolationProblem,
    ValidationConfig,
    elastic_energy,
    eval_curve,
    eval_tilde_curve,
    interpolation_residual,
    validate,
)
from .optimizer import ExtensionFamily, optimize_energy
from .pipeline import RunReport, RunRequest, run
from .quadrature import QuadratureConfig
from .refiner import SolverConfig, refine
from .results import BranchResult

__all__ = [
    "AngleSpline",
    "BranchResult",
    "ExtensionFamily",
    "InterpolationProblem",
    "QuadratureConfig",
    "RunReport",
    "RunRequest",
    "SolverConfig",
    "SpiralSplineError",
    "ValidationConfig",
    "all_sigmas",
    "elastic_energy",
    "estimate",
    "eval_curve",
    "eval_tilde_curve",
    "index_from_sigma",
    "interpolation_residual",
    "optimize_energy",
    "refine",
    "run",
    "sigma_from_index",
    "validate",
]

__version__ = "0.1.0"
