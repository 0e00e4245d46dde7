"""Per-cube cubic lifting of the quadratic solution.

Each cube gets one cubic polynomial interpolating the discrete solution at
the 20 standard cubic Lagrange nodes of a macro-tetrahedron.  The macro-tet
is a right corner simplex: it is anchored at a cube corner with three
axis-aligned legs of length ``3h/2`` pointing into the domain (direction +d
when the cube index along d is at most n-2, else -d), so all 20 nodes land
on existing half-spacing lattice nodes inside the closed domain.  The cubic
is then evaluated on the whole cube, extrapolating beyond the macro-tet by
design.

In the cube-local frame ``t = signs * (x - anchor) / h`` the node set is the
same for every cube, so a single exact 20x20 interpolation inverse serves
the whole mesh.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .exactmath import MultiPoly, invert_rational_matrix
from .mesh import Mesh


class LiftUnavailableError(ValueError):
    """The macro-tetrahedron cannot fit (single-cube mesh)."""


#: Exponent triples of the 20-dimensional cubic space, fixed report order.
CUBIC_MONOMIALS = tuple(
    (a, b, c)
    for a in range(4)
    for b in range(4 - a)
    for c in range(4 - a - b)
)

#: Macro-tet interpolation nodes in the local frame, doubled to integers:
#: barycentric thirds of the right corner simplex with legs 3/2 along the
#: axes are exactly the half-lattice points with t_x + t_y + t_z <= 3/2.
MACRO_NODES_HALVES = tuple(
    (p, q, r)
    for p in range(4)
    for q in range(4 - p)
    for r in range(4 - p - q)
)

#: Macro-tet vertices in the local frame, doubled to integers.
MACRO_VERTS_HALVES = ((0, 0, 0), (3, 0, 0), (0, 3, 0), (0, 0, 3))


@lru_cache(maxsize=1)
def _interp_inverse() -> np.ndarray:
    """Float image of the exact inverse nodal Vandermonde, shape (20, 20)."""
    rows = []
    for halves in MACRO_NODES_HALVES:
        t = [Fraction(v, 2) for v in halves]
        rows.append([t[0] ** a * t[1] ** b * t[2] ** c for (a, b, c) in CUBIC_MONOMIALS])
    inv = invert_rational_matrix(rows)
    return np.array([[float(v) for v in row] for row in inv])


def _cube_frame(mesh: Mesh, cube: int) -> tuple[np.ndarray, np.ndarray]:
    n = mesh.n
    if n < 2:
        raise LiftUnavailableError(
            "cubic lift needs at least two cubes per axis for the macro-tet"
        )
    if not 0 <= cube < mesh.num_cubes:
        raise IndexError(f"cube index {cube} out of range")
    coords = mesh.cube_corners[cube]
    signs = np.where(coords <= n - 2, 1, -1).astype(np.int64)
    anchor_halves = 2 * coords + np.where(signs < 0, 2, 0)
    return signs, anchor_halves


def macro_nodes(mesh: Mesh, cube: int) -> tuple[np.ndarray, np.ndarray]:
    """Node indices (20,) and macro-tet vertex coordinates (4, 3) of a cube."""
    signs, anchor = _cube_frame(mesh, cube)
    halves = anchor[None, :] + signs[None, :] * np.array(MACRO_NODES_HALVES)
    m = 2 * mesh.n + 1
    if halves.min() < 0 or halves.max() >= m:
        raise LiftUnavailableError(f"macro-tet of cube {cube} leaves the domain")
    strides = np.array([m * m, m, 1], dtype=np.int64)
    ids = halves @ strides
    verts = (anchor[None, :] + signs[None, :] * np.array(MACRO_VERTS_HALVES)) * (
        mesh.h / 2.0
    )
    return ids.astype(np.int64), verts


@dataclass(frozen=True)
class CubicLift:
    """Cubic polynomial of one cube, coefficients in the local t-frame."""

    cube: int
    coeffs: np.ndarray  # (20,) ordered by CUBIC_MONOMIALS
    signs: np.ndarray  # (3,) entries +-1
    anchor_halves: np.ndarray  # (3,) half-lattice ints
    h_exact: Fraction

    def _to_local(self, points: np.ndarray) -> np.ndarray:
        h = float(self.h_exact)
        anchor = self.anchor_halves * (h / 2.0)
        return self.signs * (np.atleast_2d(points) - anchor) / h

    def evaluate(self, points) -> np.ndarray:
        t = self._to_local(np.asarray(points, dtype=float))
        out = np.zeros(t.shape[0])
        for coeff, (a, b, c) in zip(self.coeffs, CUBIC_MONOMIALS):
            if coeff:
                out += coeff * t[:, 0] ** a * t[:, 1] ** b * t[:, 2] ** c
        return out

    def monomial_coefficients(self) -> dict[tuple[int, int, int], float]:
        """Coefficients in global coordinates, via exact affine expansion."""
        h = self.h_exact
        locals_ = []
        for d in range(3):
            s = Fraction(int(self.signs[d]))
            a = Fraction(int(self.anchor_halves[d])) * h / 2
            row = [Fraction(0)] * 3
            row[d] = s / h
            locals_.append(MultiPoly({
                (1, 0, 0): row[0], (0, 1, 0): row[1], (0, 0, 1): row[2],
                (0, 0, 0): -s * a / h,
            }))
        poly = MultiPoly()
        for coeff, (a, b, c) in zip(self.coeffs, CUBIC_MONOMIALS):
            if coeff:
                term = locals_[0] ** a * locals_[1] ** b * locals_[2] ** c
                poly = poly + term * Fraction(float(coeff))
        return {exps: float(q) for exps, q in poly.terms.items()}


@dataclass(frozen=True)
class LiftedSolution:
    """Cubic lifts of every cube, stored as one coefficient table."""

    mesh: Mesh
    coeffs: np.ndarray  # (num_cubes, 20)
    signs: np.ndarray  # (num_cubes, 3)
    anchors_halves: np.ndarray  # (num_cubes, 3)

    def cube_lift(self, cube: int) -> CubicLift:
        return CubicLift(
            cube=cube,
            coeffs=self.coeffs[cube].copy(),
            signs=self.signs[cube].copy(),
            anchor_halves=self.anchors_halves[cube].copy(),
            h_exact=self.mesh.h_exact,
        )


def lift_cube(mesh: Mesh, values: np.ndarray, cube: int) -> CubicLift:
    """Interpolate the nodal vector at one cube's 20 macro nodes."""
    ids, _ = macro_nodes(mesh, cube)
    signs, anchor = _cube_frame(mesh, cube)
    coeffs = _interp_inverse() @ np.asarray(values, dtype=float)[ids]
    return CubicLift(
        cube=cube,
        coeffs=coeffs,
        signs=signs,
        anchor_halves=anchor,
        h_exact=mesh.h_exact,
    )


def lift_all(mesh: Mesh, values: np.ndarray) -> LiftedSolution:
    """Cubic lifts of all cubes at once (independent per cube)."""
    n = mesh.n
    if n < 2:
        raise LiftUnavailableError(
            "cubic lift needs at least two cubes per axis for the macro-tet"
        )
    values = np.asarray(values, dtype=float)
    coords = mesh.cube_corners
    signs = np.where(coords <= n - 2, 1, -1).astype(np.int64)
    anchors = 2 * coords + np.where(signs < 0, 2, 0)
    halves = anchors[:, None, :] + signs[:, None, :] * np.array(MACRO_NODES_HALVES)[None]
    m = 2 * n + 1
    strides = np.array([m * m, m, 1], dtype=np.int64)
    ids = halves @ strides
    coeffs = values[ids] @ _interp_inverse().T
    return LiftedSolution(mesh=mesh, coeffs=coeffs, signs=signs, anchors_halves=anchors)
