"""Global assembly of the quadratic Poisson system and a Jacobi-CG solver.

Homogeneous Dirichlet conditions are imposed by eliminating boundary nodes,
which needs no right-hand-side correction.  Assembly exploits the mesh
uniformity: each of the six cube slots shares one local stiffness matrix,
and element contributions are reduced slot by slot in a fixed order, so two
assemblies of the same mesh produce identical values bit for bit.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix

from .fem import QuadratureRule, local_stiffness, ref_p2_values, tet_quadrature
from .mesh import KUHN_TETS, Mesh

_CHUNK = 1 << 15  # cubes per block in quadrature loops, bounds memory


@dataclass
class SolveStats:
    iterations: int
    residual: float
    seconds: float


@dataclass
class SparseSystem:
    """CSR matrix and right-hand side over the interior quadratic nodes.

    ``dof_map[i]`` is the mesh node index of interior degree of freedom
    ``i``; it is None for systems built directly from a matrix.
    """

    matrix: csr_matrix
    rhs: np.ndarray
    dof_map: np.ndarray | None = None


class ConvergenceFailure(RuntimeError):
    """Raised when CG exhausts its iteration budget.

    Carries the best iterate seen and its statistics, so callers can inspect
    or report the partial solve.
    """

    def __init__(self, message: str, iterate: np.ndarray, stats: SolveStats):
        super().__init__(message)
        self.iterate = iterate
        self.stats = stats


def _slot_points(slot: int, rule: QuadratureRule) -> np.ndarray:
    # quadrature points in cube-local unit coordinates; rows of (chain[1:]
    # - chain[0]) are the edge vectors, i.e. the transposed Jacobian
    chain = KUHN_TETS[slot].astype(float)
    return rule.points @ (chain[1:] - chain[0]) + chain[0]


def _stiffness(mesh: Mesh, new_index: np.ndarray | None) -> csr_matrix:
    if new_index is None:
        dim = mesh.num_nodes
    else:
        dim = int(new_index.max()) + 1
    h = mesh.h
    total = None
    for s in range(6):
        local = local_stiffness(h * KUHN_TETS[s])
        en = mesh.element_nodes[s::6]
        rows = np.repeat(en, 10, axis=1).ravel()
        cols = np.tile(en, (1, 10)).ravel()
        data = np.tile(local.ravel(), en.shape[0])
        if new_index is not None:
            rows = new_index[rows]
            cols = new_index[cols]
            keep = (rows >= 0) & (cols >= 0)
            rows, cols, data = rows[keep], cols[keep], data[keep]
        part = coo_matrix((data, (rows, cols)), shape=(dim, dim)).tocsr()
        total = part if total is None else total + part
    return total


def full_stiffness(mesh: Mesh) -> csr_matrix:
    """Gradient-product matrix over all quadratic nodes, no elimination.

    The constant vector lies in its kernel; useful for whole-mesh identities
    and the patch-orthogonality corollary.
    """
    return _stiffness(mesh, None)


def assemble(
    mesh: Mesh,
    f,
    rule: QuadratureRule | None = None,
    *,
    interpolate_load: bool = False,
) -> SparseSystem:
    """Assemble the interior system ``A u = b`` for the load ``f``.

    ``f`` is either a callable on (m, 3) point arrays or an object exposing
    ``.value``.  The load quadrature ``rule`` defaults to degree 8.

    With ``interpolate_load`` the forcing term is replaced by its quadratic
    nodal interpolant before integration (product approximation): ``f`` is
    then evaluated once per mesh node and the element integrals are exact
    for any rule of degree four or higher.
    """
    if rule is None:
        rule = tet_quadrature(8)
    interior = ~mesh.boundary_mask
    new_index = np.full(mesh.num_nodes, -1, dtype=np.int64)
    new_index[interior] = np.arange(int(interior.sum()))
    matrix = _stiffness(mesh, new_index)

    value = f.value if hasattr(f, "value") else f
    h = mesh.h
    basis = ref_p2_values(rule.points)  # (10, nq)
    weights = rule.weights
    b_full = np.zeros(mesh.num_nodes)
    corners = mesh.cube_corners
    if interpolate_load:
        f_nodes = np.asarray(value(mesh.node_coords), dtype=float)
    for s in range(6):
        pts_local = _slot_points(s, rule)
        en = mesh.element_nodes[s::6]
        for lo in range(0, corners.shape[0], _CHUNK):
            hi = min(lo + _CHUNK, corners.shape[0])
            if interpolate_load:
                fvals = f_nodes[en[lo:hi]] @ basis
            else:
                x = (corners[lo:hi, None, :] + pts_local[None, :, :]) * h
                fvals = np.asarray(value(x.reshape(-1, 3)), dtype=float)
                fvals = fvals.reshape(hi - lo, len(weights))
            contrib = (fvals * weights) @ basis.T * h**3
            np.add.at(b_full, en[lo:hi], contrib)
    return SparseSystem(
        matrix=matrix,
        rhs=b_full[interior],
        dof_map=np.flatnonzero(interior),
    )


def cg_solve(
    system: SparseSystem, tol: float = 1e-12, maxit: int | None = None
) -> tuple[np.ndarray, SolveStats]:
    """Jacobi-preconditioned conjugate gradients down to a relative residual.

    Returns the solution and solve statistics; raises
    :class:`ConvergenceFailure` with the best iterate if ``maxit`` is hit.
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    matrix, rhs = system.matrix, system.rhs
    dim = rhs.shape[0]
    if maxit is None:
        maxit = max(1000, 10 * dim)
    start = time.perf_counter()
    rhs_norm = float(np.linalg.norm(rhs))
    if rhs_norm == 0.0:
        return np.zeros(dim), SolveStats(0, 0.0, time.perf_counter() - start)

    inv_diag = 1.0 / matrix.diagonal()
    x = np.zeros(dim)
    r = rhs.copy()
    z = inv_diag * r
    p = z.copy()
    rz = float(r @ z)
    best_x, best_res = x.copy(), 1.0
    for it in range(1, maxit + 1):
        ap = matrix @ p
        alpha = rz / float(p @ ap)
        x += alpha * p
        r -= alpha * ap
        res = float(np.linalg.norm(r)) / rhs_norm
        if res < best_res:
            best_res = res
            best_x = x.copy()
        if res <= tol:
            return x, SolveStats(it, res, time.perf_counter() - start)
        z = inv_diag * r
        rz_next = float(r @ z)
        p = z + (rz_next / rz) * p
        rz = rz_next
    stats = SolveStats(maxit, best_res, time.perf_counter() - start)
    raise ConvergenceFailure(
        f"no convergence to {tol:g} within {maxit} iterations "
        f"(best residual {best_res:.3e})",
        best_x,
        stats,
    )
