import numpy as np
import pytest
from scipy.sparse import identity as sparse_identity
from scipy.sparse import csr_matrix

from p2tet.analysis import builtin_problem
from p2tet.fem import tet_quadrature
from p2tet.mesh import build_uniform_mesh
from p2tet.system import (
    ConvergenceFailure,
    SparseSystem,
    assemble,
    cg_solve,
    full_stiffness,
)


def test_single_cube_has_one_unknown():
    mesh = build_uniform_mesh(1)
    system = assemble(mesh, lambda p: np.ones(len(p)), tet_quadrature(6))
    assert system.rhs.shape == (1,)
    assert system.dof_map.tolist() == [mesh.node_index(1, 1, 1)]


def test_two_cubes_dimension():
    mesh = build_uniform_mesh(2)
    system = assemble(mesh, lambda p: np.ones(len(p)), tet_quadrature(6))
    assert system.rhs.shape == (27,)
    assert system.matrix.shape == (27, 27)


def test_constants_in_kernel_before_elimination():
    mesh = build_uniform_mesh(2)
    A = full_stiffness(mesh)
    ones = np.ones(mesh.num_nodes)
    assert np.abs(A @ ones).max() < 1e-11
    assert abs(A - A.T).max() < 1e-13


def test_assembly_is_deterministic():
    mesh1 = build_uniform_mesh(3)
    mesh2 = build_uniform_mesh(3)
    u = builtin_problem("poly1")
    s1 = assemble(mesh1, u.rhs(), tet_quadrature(6))
    s2 = assemble(mesh2, u.rhs(), tet_quadrature(6))
    assert np.array_equal(s1.matrix.indptr, s2.matrix.indptr)
    assert np.array_equal(s1.matrix.indices, s2.matrix.indices)
    assert np.array_equal(s1.matrix.data, s2.matrix.data)
    assert np.array_equal(s1.rhs, s2.rhs)


def test_interpolated_load_matches_quadrature_for_quadratic_f():
    # for quadratic f the interpolant is f itself, so both paths agree
    mesh = build_uniform_mesh(2)
    f = lambda p: 2.0 + p[:, 0] * p[:, 1] - 3.0 * p[:, 2] ** 2
    direct = assemble(mesh, f, tet_quadrature(6))
    interp = assemble(mesh, f, tet_quadrature(6), interpolate_load=True)
    assert np.abs(direct.rhs - interp.rhs).max() < 1e-14


def test_cg_identity_converges_immediately():
    b = np.array([3.0, -1.0, 2.0])
    system = SparseSystem(matrix=csr_matrix(sparse_identity(3)), rhs=b)
    x, stats = cg_solve(system, tol=1e-12)
    assert np.allclose(x, b, atol=1e-14)
    assert stats.iterations <= 1


def test_cg_small_spd_system():
    A = csr_matrix(np.array([[2.0, 1.0], [1.0, 2.0]]))
    system = SparseSystem(matrix=A, rhs=np.array([3.0, 3.0]))
    x, stats = cg_solve(system, tol=1e-13)
    assert np.abs(x - 1.0).max() < 1e-12
    assert stats.residual <= 1e-13


def test_cg_zero_rhs():
    A = csr_matrix(np.array([[2.0, 1.0], [1.0, 2.0]]))
    x, stats = cg_solve(SparseSystem(matrix=A, rhs=np.zeros(2)))
    assert np.all(x == 0) and stats.iterations == 0


def test_cg_rejects_bad_tolerance():
    A = csr_matrix(np.eye(2))
    with pytest.raises(ValueError):
        cg_solve(SparseSystem(matrix=A, rhs=np.ones(2)), tol=0.0)


def test_cg_nonconvergence_carries_best_iterate():
    mesh = build_uniform_mesh(2)
    system = assemble(mesh, lambda p: np.ones(len(p)), tet_quadrature(6))
    with pytest.raises(ConvergenceFailure) as info:
        cg_solve(system, tol=1e-14, maxit=2)
    err = info.value
    assert err.stats.iterations == 2
    assert err.iterate.shape == system.rhs.shape
    assert 0 < err.stats.residual < 1.0


def test_discrete_residual_matches_tolerance():
    mesh = build_uniform_mesh(4)
    u = builtin_problem("poly1")
    system = assemble(mesh, u.rhs(), tet_quadrature(6), interpolate_load=True)
    x, stats = cg_solve(system, tol=1e-12)
    resid = np.linalg.norm(system.rhs - system.matrix @ x)
    assert resid <= 1e-12 * np.linalg.norm(system.rhs)
    assert stats.iterations > 0 and stats.seconds >= 0.0
