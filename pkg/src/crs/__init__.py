"""Convex-reformulation solvers for the cubic regularization subproblem

    min_x  1/2 x^T A x + b^T x + rho/3 ||x||^3

with Lanczos eigenvalue estimation, exact lifted projections, projected
first-order methods, an adaptive cubic regularization outer loop and a
synthetic benchmark generator.
"""

from .arc import ArcConfig, SmoothObjective, arc_minimize
from .bench import GeneratedInstance, InstanceSpec, generate, run_experiment
from .eigmin import EigEstimate, lanczos_min_eig
from .model import (
    CrsProblem,
    SurrogateSpec,
    f1_grad,
    f1_value,
    lifted_value_grad,
    lipschitz_gamma,
    load_problem,
    make_surrogate,
    save_problem,
)
from .operators import DenseOperator, SparseOperator, SymmetricOperator, as_operator, load_matrix_market
from .projections import LiftedPoint, cubic_mu_root, project_Bhat, project_S
from .solvers import (
    InnerResult,
    SolveReport,
    SolverConfig,
    apg_solve,
    bbm_solve,
    cauchy_point,
    dense_oracle_solve,
    recover_solution,
    solve_crs,
)

__version__ = "0.1.0"

__all__ = [
    "ArcConfig", "SmoothObjective", "arc_minimize",
    "GeneratedInstance", "InstanceSpec", "generate", "run_experiment",
    "EigEstimate", "lanczos_min_eig",
    "CrsProblem", "SurrogateSpec", "f1_grad", "f1_value", "lifted_value_grad",
    "lipschitz_gamma", "load_problem", "make_surrogate", "save_problem",
    "DenseOperator", "SparseOperator", "SymmetricOperator", "as_operator", "load_matrix_market",
    "LiftedPoint", "cubic_mu_root", "project_Bhat", "project_S",
    "InnerResult", "SolveReport", "SolverConfig", "apg_solve", "bbm_solve",
    "cauchy_point", "dense_oracle_solve", "recover_solution", "solve_crs",
]
