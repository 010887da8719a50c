"""Exact finite-time and asymptotic distributions of TASEP on a ring.

Joint multi-point distributions are computed three independent ways (nested
contour integrals of Fredholm determinants over Bethe root sets, a
Toeplitz-like determinant, and Markov-chain references), and the large-ring
relaxation-scale limit laws are evaluated directly.
"""

from .core import (
    InitialCondition,
    LimitCoordinate,
    ModelParams,
    Observation,
    make_explicit_ic,
    make_flat_ic,
    make_step_ic,
    make_stepflat_ic,
    scaled_params,
)
from .errors import (
    NumericalError,
    ParameterError,
    PtasepError,
    RegimeError,
    ResourceError,
)
from .finite_dist import (
    QuadConfig,
    multipoint_prob,
    multipoint_prob_partial_uniform,
    multipoint_prob_uniform,
)
from .limits import F_ic, F_uniform, LimitConfig
from .simulator import BACKEND as SIMULATOR_BACKEND
from .simulator import ctmc_exact_prob, estimate_joint_prob

__version__ = "0.1.0"

__all__ = [
    "InitialCondition",
    "LimitCoordinate",
    "ModelParams",
    "Observation",
    "make_explicit_ic",
    "make_flat_ic",
    "make_step_ic",
    "make_stepflat_ic",
    "scaled_params",
    "PtasepError",
    "ParameterError",
    "RegimeError",
    "ResourceError",
    "NumericalError",
    "QuadConfig",
    "multipoint_prob",
    "multipoint_prob_uniform",
    "multipoint_prob_partial_uniform",
    "F_ic",
    "F_uniform",
    "LimitConfig",
    "SIMULATOR_BACKEND",
    "ctmc_exact_prob",
    "estimate_joint_prob",
    "__version__",
]
