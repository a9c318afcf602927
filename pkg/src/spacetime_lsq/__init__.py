"""Space-time least-squares spectral solvers for linear Schrodinger dynamics.

Chebyshev spectral discretization in time, Fourier discretization on the
2-torus in space, conjugate-gradient normal-equation solves with an exact
free-dynamics preconditioner, plus classical time-stepping baselines.
"""

from . import baselines, bench, chebyshev, lsq, ode, pde, torus, validation
from .chebyshev import ChebKind, ChebQuadrature, ChebSeries, cheb_eval
from .lsq import (
    CgNonConvergence,
    LsqProblem,
    SolveDiagnostics,
    apply_normal,
    apply_residual,
    apply_residual_adjoint,
    energy,
    free_precond_solve,
    pcg_solve,
    rhs,
)
from .ode import CosineOde, CosineOdeSolver, exact_solution, solve_ode, sup_error
from .pde import (
    OracleValidationError,
    PeriodicSchrodinger,
    PeriodicSchrodingerSolver,
    c0_error,
    gaussian_initial_field,
    reference_solution,
    solve_schrodinger,
    to_schrodinger_picture,
)
from .torus import MovingCosinePotential

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "baselines",
    "bench",
    "chebyshev",
    "lsq",
    "ode",
    "pde",
    "torus",
    "validation",
    "ChebKind",
    "ChebQuadrature",
    "ChebSeries",
    "cheb_eval",
    "CgNonConvergence",
    "LsqProblem",
    "SolveDiagnostics",
    "apply_normal",
    "apply_residual",
    "apply_residual_adjoint",
    "energy",
    "free_precond_solve",
    "pcg_solve",
    "rhs",
    "CosineOde",
    "CosineOdeSolver",
    "exact_solution",
    "solve_ode",
    "sup_error",
    "OracleValidationError",
    "PeriodicSchrodinger",
    "PeriodicSchrodingerSolver",
    "c0_error",
    "gaussian_initial_field",
    "reference_solution",
    "solve_schrodinger",
    "to_schrodinger_picture",
    "MovingCosinePotential",
]
