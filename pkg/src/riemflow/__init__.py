"""Second-order Riemannian gradient flow with vanishing damping alpha/t.

Exact manifold maps for the hemisphere, SPD matrices and flat space; the
curvature constants that set the convergence regime; a semi-implicit
integrator; Lyapunov-energy diagnostics; and benchmark sweeps.
"""
from .curvature import CurvatureProfile, hessian_bound_check, profile, rate_exponent, sigma, xi
from .errors import DomainError, InputError, NumericalError, OracleError, RiemflowError, StepError
from .integrator import SolverConfig, Trajectory, TrajectorySample, solve, step
from .manifolds import SPD, Euclidean, Hemisphere, Manifold
from .objectives import FlatQuadratic, KarcherMean, ProblemInstance, RayleighQuotient

__all__ = [
    "CurvatureProfile",
    "DomainError",
    "Euclidean",
    "FlatQuadratic",
    "Hemisphere",
    "InputError",
    "KarcherMean",
    "Manifold",
    "NumericalError",
    "OracleError",
    "ProblemInstance",
    "RayleighQuotient",
    "RiemflowError",
    "SPD",
    "SolverConfig",
    "StepError",
    "Trajectory",
    "TrajectorySample",
    "hessian_bound_check",
    "profile",
    "rate_exponent",
    "sigma",
    "solve",
    "step",
    "xi",
]

__version__ = "0.1.0"
