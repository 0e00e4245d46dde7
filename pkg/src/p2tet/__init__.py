"""Quadratic Lagrange elements on uniform six-tet cube meshes.

The package solves the Poisson problem with homogeneous Dirichlet data on
the unit cube, verifies in exact rational arithmetic that quadratic nodal
interpolation of cubics is gradient-orthogonal to every interior basis
function on its support patch, lifts the discrete solution to per-cube
cubic polynomials, and reproduces interpolation-superconvergence rate
tables.
"""

from .analysis import (
    ConvergenceReport,
    FieldFunction,
    StudyOptions,
    builtin_problem,
    convergence_study,
    error_norms,
    fe_evaluate,
    nodal_interpolate,
)
from .exactmath import MultiPoly, Rational, integrate_over_tet, p2_interpolate
from .fem import QuadratureRule, local_load, local_stiffness, ref_p2_basis, tet_quadrature
from .lift import CubicLift, LiftedSolution, lift_all, lift_cube, macro_nodes
from .mesh import (
    Mesh,
    NodeClass,
    NodeKind,
    Tetrahedron,
    build_uniform_mesh,
    classify_node,
    support_patch,
)
from .orthogonality import (
    LemmaReport,
    PatchBasis,
    orthogonality_defect,
    patch_basis,
    verify_all_lemmas,
)
from .system import (
    ConvergenceFailure,
    SolveStats,
    SparseSystem,
    assemble,
    cg_solve,
    full_stiffness,
)

__version__ = "0.1.0"
