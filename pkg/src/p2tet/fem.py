"""Reference quadratic element kernels and tetrahedron quadrature.

The reference tetrahedron is ``{x, y, z >= 0, x + y + z <= 1}`` with nodes
0..3 at the vertices (0,0,0), (1,0,0), (0,1,0), (0,0,1) and nodes 4..9 at
the edge midpoints in ``P2_EDGES`` order.  Quadrature rules are conical
products of Gauss-Jacobi lines, which have positive weights and are exact
for any requested total degree; each rule is validated monomial-by-monomial
against the exact integrator in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

from .exactmath import P2_EDGES

#: Reference node coordinates, vertices then edge midpoints.
REF_NODES = np.array(
    [
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.5, 0.0, 0.0],
        [0.0, 0.5, 0.0],
        [0.0, 0.0, 0.5],
        [0.5, 0.5, 0.0],
        [0.5, 0.0, 0.5],
        [0.0, 0.5, 0.5],
    ]
)

_DLAM = np.array(
    [[-1.0, -1.0, -1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
)


def _barycentric(points: np.ndarray) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    lam = np.empty((4,) + pts.shape[:-1])
    lam[0] = 1.0 - pts[..., 0] - pts[..., 1] - pts[..., 2]
    lam[1] = pts[..., 0]
    lam[2] = pts[..., 1]
    lam[3] = pts[..., 2]
    return lam


def ref_p2_values(points) -> np.ndarray:
    """Values of the ten basis functions at reference points, shape (10, m)."""
    lam = _barycentric(np.atleast_2d(points))
    out = np.empty((10,) + lam.shape[1:])
    for i in range(4):
        out[i] = lam[i] * (2.0 * lam[i] - 1.0)
    for e, (a, b) in enumerate(P2_EDGES):
        out[4 + e] = 4.0 * lam[a] * lam[b]
    return out


def ref_p2_gradients(points) -> np.ndarray:
    """Reference gradients of the ten basis functions, shape (10, m, 3)."""
    lam = _barycentric(np.atleast_2d(points))
    m = lam.shape[1]
    out = np.empty((10, m, 3))
    for i in range(4):
        out[i] = (4.0 * lam[i] - 1.0)[:, None] * _DLAM[i]
    for e, (a, b) in enumerate(P2_EDGES):
        out[4 + e] = 4.0 * (lam[a][:, None] * _DLAM[b] + lam[b][:, None] * _DLAM[a])
    return out


def ref_p2_basis(i: int, point) -> tuple[float, np.ndarray]:
    """Value and gradient of basis ``i`` at one reference point."""
    if not 0 <= i < 10:
        raise IndexError(f"basis index {i} out of range 0..9")
    pt = np.asarray(point, dtype=float).reshape(1, 3)
    return float(ref_p2_values(pt)[i, 0]), ref_p2_gradients(pt)[i, 0].copy()


@dataclass(frozen=True)
class QuadratureRule:
    """Points (m, 3) in the reference tet, weights (m,), and the exact degree."""

    points: np.ndarray
    weights: np.ndarray
    exactness_degree: int

    def __len__(self):
        return len(self.weights)


def _gauss_jacobi_01(m: int, alpha: int) -> tuple[np.ndarray, np.ndarray]:
    # nodes/weights for int_0^1 f(t) (1-t)^alpha dt
    x, w = roots_jacobi(m, alpha, 0.0)
    return (x + 1.0) / 2.0, w * 0.5 ** (alpha + 1)


@lru_cache(maxsize=None)
def tet_quadrature(degree: int) -> QuadratureRule:
    """Conical-product rule exact for total degree >= ``degree``."""
    if degree < 0:
        raise ValueError("quadrature degree must be nonnegative")
    m = degree // 2 + 1
    t1, w1 = _gauss_jacobi_01(m, 2)
    t2, w2 = _gauss_jacobi_01(m, 1)
    t3, w3 = _gauss_jacobi_01(m, 0)
    a = np.repeat(t1, m * m)
    b = np.tile(np.repeat(t2, m), m)
    c = np.tile(t3, m * m)
    x = a
    y = b * (1.0 - a)
    z = c * (1.0 - a) * (1.0 - b)
    w = np.repeat(w1, m * m) * np.tile(np.repeat(w2, m), m) * np.tile(w3, m * m)
    pts = np.column_stack([x, y, z])
    pts.setflags(write=False)
    w.setflags(write=False)
    return QuadratureRule(points=pts, weights=w, exactness_degree=2 * m - 1)


def _jacobian(tet: np.ndarray) -> tuple[np.ndarray, float]:
    tet = np.asarray(tet, dtype=float)
    jac = (tet[1:] - tet[0]).T
    det = float(np.linalg.det(jac))
    if det == 0.0:
        raise ValueError("degenerate tetrahedron")
    return jac, det


def local_stiffness(tet) -> np.ndarray:
    """10x10 gradient-product matrix of one tetrahedron.

    The integrand is quadratic, so the internal degree-2 rule is exact up to
    roundoff.  The result is symmetric positive semidefinite with rank 9 and
    zero row sums (constants lie in the kernel of the gradient).
    """
    jac, det = _jacobian(tet)
    rule = tet_quadrature(2)
    grads = ref_p2_gradients(rule.points) @ np.linalg.inv(jac)
    return abs(det) * np.einsum("iqd,jqd,q->ij", grads, grads, rule.weights)


def local_load(tet, f, rule: QuadratureRule) -> np.ndarray:
    """Load vector ``int_tet f * phi_i`` by quadrature, shape (10,)."""
    jac, det = _jacobian(tet)
    tet = np.asarray(tet, dtype=float)
    points = tet[0] + rule.points @ jac.T
    value = f.value if hasattr(f, "value") else f
    fvals = np.asarray(value(points), dtype=float)
    return abs(det) * (ref_p2_values(rule.points) @ (rule.weights * fvals))
