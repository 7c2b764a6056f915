"""fdeint: spectral collocation for Caputo fractional differential equations.

The solver expands the vector field of y^(alpha) = f(t, y) in polynomials
orthonormal under the kernel-induced weight a*(1-c)^(a-1), advances over a
graded prefix glued to a uniform tail, and carries the nonlocal memory
through precomputed fractional integrals of the basis.  A linear-stability
toolkit and a small benchmark harness round out the package.

Typical use:

    >>> import fdeint
    >>> traj, record = fdeint.run("problem1", N=3, n=1, nu=1)
    >>> round(record.mescd) >= 13
    True
"""

from .bench import WpdRecord, mescd, run, wpd
from .fractional import (
    FractionalTables,
    TailKernelConfig,
    TailKernelEvaluator,
    build_tables,
    load_tables,
    rl_basis_matrix,
    rl_basis_row,
    save_tables,
    tail_kernel,
)
from .mesh import MixedMesh, StepDescriptor, build_mixed_mesh, step_descriptor
from .problems import PROBLEMS, BenchProblem, get_problem, load_problem_file
from .quadrature import (
    QuadratureRule,
    RecurrenceTable,
    evaluate_basis,
    gauss_jacobi_rule,
    jacobi_recurrence,
)
from .solver import (
    CoefficientHistory,
    NewtonError,
    ProblemSpec,
    SolutionTrajectory,
    SolverConfig,
    advance_step,
    memory_term_graded,
    memory_term_uniform,
    solve,
    solve_step,
    taylor_term,
)
from .stability import (
    AccuracyDomainError,
    RegionData,
    Tableau,
    butcher_tableau,
    mittag_leffler,
    region_boundary,
    stability_at_infinity,
    stability_value,
)

__version__ = "0.1.0"

__all__ = [
    "AccuracyDomainError",
    "BenchProblem",
    "CoefficientHistory",
    "FractionalTables",
    "MixedMesh",
    "NewtonError",
    "PROBLEMS",
    "ProblemSpec",
    "QuadratureRule",
    "RecurrenceTable",
    "RegionData",
    "SolutionTrajectory",
    "SolverConfig",
    "StepDescriptor",
    "Tableau",
    "TailKernelConfig",
    "TailKernelEvaluator",
    "WpdRecord",
    "advance_step",
    "build_mixed_mesh",
    "build_tables",
    "butcher_tableau",
    "evaluate_basis",
    "gauss_jacobi_rule",
    "get_problem",
    "jacobi_recurrence",
    "load_problem_file",
    "load_tables",
    "memory_term_graded",
    "memory_term_uniform",
    "mescd",
    "mittag_leffler",
    "region_boundary",
    "rl_basis_matrix",
    "rl_basis_row",
    "run",
    "save_tables",
    "solve",
    "solve_step",
    "stability_at_infinity",
    "stability_value",
    "step_descriptor",
    "tail_kernel",
    "taylor_term",
    "wpd",
]
