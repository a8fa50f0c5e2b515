"""Open spin-s XXZ chain with nondiagonal boundaries at roots of unity.

Fused R and K matrices, double-row transfer matrices and their functional
relations, two-Q T-Q relations with a Bethe-root solver, and the spin-1
Hamiltonian with its energy formulas.
"""
__version__ = "0.1.0"

from .errors import ConvergenceError, PoleError, RootCollisionError, SpinXXZError, ValidationError
from .params import BoundaryCase, ModelParams, table1_params, table2_params
from .integrable import fused_k, fused_r, k_minus_half, r_half
from .transfer import delta, monodromy, rescaled_fundamental
from .tq import BetheSolution, SolverSettings, bae_residual, lambda_from_tq, solve_bethe
from .spin1 import build_hamiltonian, diagonalize, energy_from_bethe, energy_from_derivative
from .checks import run_checks

__all__ = [
    "ConvergenceError", "PoleError", "RootCollisionError", "SpinXXZError", "ValidationError",
    "BoundaryCase", "ModelParams", "table1_params", "table2_params",
    "fused_k", "fused_r", "k_minus_half", "r_half",
    "delta", "monodromy", "rescaled_fundamental",
    "BetheSolution", "SolverSettings", "bae_residual", "lambda_from_tq", "solve_bethe",
    "build_hamiltonian", "diagonalize", "energy_from_bethe", "energy_from_derivative",
    "run_checks",
]
