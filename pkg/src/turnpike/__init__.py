"""Turnpike-guided solvers for long-horizon optimal control problems."""

from .errors import TurnpikeError
from .model import (
    AffineQuadratic,
    ExtremalPoint,
    Problem,
    Terminal,
    assemble_abw,
    check_assumptions,
    eval_hamiltonian,
    hessian_blocks,
    linearize,
    load_lq_file,
)
from .registry import get_problem
from .riccati import build_hamiltonian_matrix, solve_splitting, verify_spectrum
from .static import StaticSolution, compute_defect, compute_gamma_bar, solve_static, solve_static_lq

__version__ = "0.1.0"
