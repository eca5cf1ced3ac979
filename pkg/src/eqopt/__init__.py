"""Equality-constrained quadratic and convex programming.

Linear equality constraints are eliminated by a feasible-set
parameterization (projector form or null-space form), turning the
constrained problem into an unconstrained one. Quadratic programs then
have closed-form solutions cross-checkable against a dense KKT oracle;
smooth convex objectives are handled by damped or pure Newton iterations
with a-priori convergence certificates.
"""

from .errors import (
    ComputationError,
    DivergenceError,
    EqoptError,
    InfeasibleConstraintsError,
    InvalidHMatrixError,
    LineSearchError,
    NonConvexError,
    OracleUnavailableError,
    ProblemFormatError,
    ProblemParseError,
    ProblemSchemaError,
    RankDeficiencyError,
    UnknownObjectiveError,
)
from .expressions import (
    EqualityConstraints,
    NullspaceExpression,
    ProjectorExpression,
    build_nullspace,
    build_projector,
    embed,
)
from .linalg import ReducedConstraints, nullspace_basis, pseudo_inverse, rrqr_reduce
from .nlp import (
    ConvergenceConstants,
    IterationBound,
    NewtonConfig,
    NewtonIteration,
    NewtonTrace,
    ObjectiveOracle,
    ReducedObjective,
    backtracking_line_search,
    estimate_convergence_constants,
    iteration_bound,
    newton_decrement,
    newton_solve,
    reduce_problem,
    sqp_iterate,
    suboptimality_bound,
)
from .objectives import (
    log_sum_exp,
    neg_log_barrier_quadratic,
    objective_names,
    objective_registry,
    quadratic,
    sum_exp,
)
from .problems import FORMAT_VERSION, GeneratorSpec, NlpProblem, generate, load, save
from .qp import QpProblem, QpSolution, solve_kkt, solve_nullspace, solve_projector

__version__ = "0.1.0"

__all__ = [
    "ComputationError",
    "ConvergenceConstants",
    "DivergenceError",
    "EqoptError",
    "EqualityConstraints",
    "FORMAT_VERSION",
    "GeneratorSpec",
    "InfeasibleConstraintsError",
    "InvalidHMatrixError",
    "IterationBound",
    "LineSearchError",
    "NewtonConfig",
    "NewtonIteration",
    "NewtonTrace",
    "NlpProblem",
    "NonConvexError",
    "NullspaceExpression",
    "ObjectiveOracle",
    "OracleUnavailableError",
    "ProblemFormatError",
    "ProblemParseError",
    "ProblemSchemaError",
    "ProjectorExpression",
    "QpProblem",
    "QpSolution",
    "RankDeficiencyError",
    "ReducedConstraints",
    "ReducedObjective",
    "UnknownObjectiveError",
    "backtracking_line_search",
    "build_nullspace",
    "build_projector",
    "embed",
    "estimate_convergence_constants",
    "generate",
    "iteration_bound",
    "load",
    "log_sum_exp",
    "neg_log_barrier_quadratic",
    "newton_decrement",
    "newton_solve",
    "nullspace_basis",
    "objective_names",
    "objective_registry",
    "pseudo_inverse",
    "quadratic",
    "reduce_problem",
    "rrqr_reduce",
    "save",
    "solve_kkt",
    "solve_nullspace",
    "solve_projector",
    "sqp_iterate",
    "suboptimality_bound",
    "sum_exp",
]
