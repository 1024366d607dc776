from .geometry import LipschitzGraph, eval_phi, eval_phi_prime, pullback, pushforward, check_lipschitz
from .coefficients import (QuasilinearSymbol, b_zero, b_plaplace, b_general, accretivity_kappa,
                           closeness_to_b0)
from .grid import HalfPlaneGrid, BoundaryTrace, GradientField, sobolev_norm, gagliardo_seminorm, trace_limit
from .operators import OperatorBackend, SpectralBackend, QuadratureBackend, make_backend
from .solver import (NonlinearSolver, SolverReport, linear_solve, boundary_fit, nonlinear_solve,
                     pde_residual, pde_residuals, representation_residual)
from .quasiregular import wirtinger, beltrami, dilatation, analyze_field, b_from_field, beltrami_to_matrix
from .config import RunConfig, SolverConfig
from .errors import (PLCauchyError, ConfigurationError, PointOutsideDomainError, InvariantViolation,
                     DegenerateEllipticityError, SolverError, OperatorAccuracyError, ContractionError,
                     BoundaryFitError, FixedPointError)
from .logger import logger

__version__ = '0.1.0'

__all__ = [
    'LipschitzGraph', 'eval_phi', 'eval_phi_prime', 'pullback', 'pushforward', 'check_lipschitz',
    'QuasilinearSymbol', 'b_zero', 'b_plaplace', 'b_general', 'accretivity_kappa', 'closeness_to_b0',
    'HalfPlaneGrid', 'BoundaryTrace', 'GradientField', 'sobolev_norm', 'gagliardo_seminorm', 'trace_limit',
    'OperatorBackend', 'SpectralBackend', 'QuadratureBackend', 'make_backend',
    'NonlinearSolver', 'SolverReport', 'linear_solve', 'boundary_fit', 'nonlinear_solve',
    'pde_residual', 'pde_residuals', 'representation_residual',
    'wirtinger', 'beltrami', 'dilatation', 'analyze_field', 'b_from_field', 'beltrami_to_matrix',
    'RunConfig', 'SolverConfig',
    'PLCauchyError', 'ConfigurationError', 'PointOutsideDomainError', 'InvariantViolation',
    'DegenerateEllipticityError', 'SolverError', 'OperatorAccuracyError', 'ContractionError',
    'BoundaryFitError', 'FixedPointError',
    'logger',
]
