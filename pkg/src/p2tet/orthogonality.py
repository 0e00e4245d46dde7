"""Exact verification of the local gradient-orthogonality identities.

For each of the four interior node classes, the global quadratic basis
function of the node, restricted to its support patch, satisfies

    (grad(p - I2 p), grad(phi))_patch = 0    for every cubic polynomial p,

where ``I2`` is per-tetrahedron quadratic nodal interpolation.  This module
assembles each patch in its canonical shifted/scaled frame, builds the basis
piecewise from the patch geometry, and evaluates every integral in exact
rational arithmetic, reporting the per-tetrahedron contributions along with
their (exactly zero, for cubics) sum.

Canonical frames, with the owning node listed first:

* cube-center node at (1/2,1/2,1/2): the six tetrahedra of the unit cube
  around its main diagonal;
* face-diagonal midpoint at (0,1/2,1/2): four tetrahedra from the two cubes
  sharing the face x=0, spanning x in [-1,1];
* axis-edge midpoint at (0,0,1/2): six tetrahedra around the vertical edge
  from (0,0,0) to (0,0,1);
* vertex node at the origin: the 24 tetrahedra of the eight surrounding
  cubes.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from .exactmath import (
    MultiPoly,
    barycentric_polynomials,
    format_fraction,
    integrate_over_tet,
    p2_interpolate,
)
from .mesh import NodeKind

Point = tuple[Fraction, Fraction, Fraction]

_H = Fraction(1, 2)

_CUBE_MID_NODE = (_H, _H, _H)
_CUBE_MID_TETS = (
    ((0, 0, 0), (1, 0, 0), (1, 1, 0), (1, 1, 1)),
    ((0, 0, 0), (0, 1, 0), (1, 1, 0), (1, 1, 1)),
    ((0, 0, 0), (0, 1, 0), (0, 1, 1), (1, 1, 1)),
    ((0, 0, 0), (0, 0, 1), (0, 1, 1), (1, 1, 1)),
    ((0, 0, 0), (0, 0, 1), (1, 0, 1), (1, 1, 1)),
    ((0, 0, 0), (1, 0, 0), (1, 0, 1), (1, 1, 1)),
)

_SQUARE_MID_NODE = (0, _H, _H)
_SQUARE_MID_TETS = (
    ((0, 0, 0), (0, 0, 1), (0, 1, 1), (1, 1, 1)),
    ((0, 0, 0), (0, 1, 0), (0, 1, 1), (1, 1, 1)),
    ((-1, 0, 0), (0, 0, 0), (0, 1, 0), (0, 1, 1)),
    ((-1, 0, 0), (0, 0, 0), (0, 0, 1), (0, 1, 1)),
)

_EDGE_MID_NODE = (0, 0, _H)
_EDGE_MID_VERTS = {
    1: (0, 0, 0), 2: (-1, 0, 0), 3: (-1, -1, 0), 4: (0, -1, 0),
    5: (0, 0, 1), 6: (1, 0, 1), 7: (1, 1, 1), 8: (0, 1, 1),
}
_EDGE_MID_TETS = tuple(
    tuple(_EDGE_MID_VERTS[i] for i in ix)
    for ix in ((1, 5, 6, 7), (1, 5, 7, 8), (1, 2, 5, 8),
               (1, 2, 3, 5), (1, 3, 4, 5), (1, 4, 5, 6))
)

_VERTEX_NODE = (0, 0, 0)
_VERTEX_VERTS = {
    1: (0, 0, -1), 2: (-1, 0, -1), 3: (-1, -1, -1), 4: (0, -1, -1),
    5: (1, 0, 0), 6: (1, 1, 0), 7: (0, 1, 0), 8: (-1, 0, 0),
    9: (-1, -1, 0), 10: (0, -1, 0), 11: (1, 0, 1), 12: (1, 1, 1),
    13: (0, 1, 1), 14: (0, 0, 1), 15: (0, 0, 0),
}
_VERTEX_TETS = tuple(
    tuple(_VERTEX_VERTS[i] for i in ix)
    for ix in (
        (1, 5, 6, 15), (1, 6, 7, 15), (1, 2, 7, 15), (7, 2, 8, 15),
        (1, 2, 3, 15), (2, 3, 8, 15), (3, 8, 9, 15), (3, 9, 10, 15),
        (3, 10, 4, 15), (3, 1, 4, 15), (1, 4, 5, 15), (10, 4, 5, 15),
        (5, 6, 12, 15), (6, 7, 12, 15), (7, 13, 12, 15), (12, 13, 14, 15),
        (11, 12, 14, 15), (5, 11, 12, 15), (7, 8, 13, 15), (8, 13, 14, 15),
        (8, 9, 14, 15), (9, 10, 14, 15), (10, 11, 14, 15), (10, 5, 11, 15),
    )
)

_PATCHES = {
    NodeKind.CUBE_MID: (_CUBE_MID_NODE, _CUBE_MID_TETS),
    NodeKind.SQUARE_MID: (_SQUARE_MID_NODE, _SQUARE_MID_TETS),
    NodeKind.EDGE_MID: (_EDGE_MID_NODE, _EDGE_MID_TETS),
    NodeKind.VERTEX: (_VERTEX_NODE, _VERTEX_TETS),
}

#: Class order used by reports: one entry per orthogonality identity.
KIND_ORDER = (NodeKind.CUBE_MID, NodeKind.SQUARE_MID, NodeKind.EDGE_MID, NodeKind.VERTEX)


@dataclass(frozen=True)
class PatchBasis:
    """A node's basis function restricted to each tet of its canonical patch."""

    kind: NodeKind
    node: Point
    tets: tuple[tuple[Point, ...], ...]
    pieces: tuple[MultiPoly, ...]


def _as_point(p) -> Point:
    return tuple(Fraction(c) for c in p)


def _basis_on_tet(node: Point, tet) -> MultiPoly:
    """Quadratic basis of ``node`` on one tet, from its role in the tet."""
    verts = [_as_point(v) for v in tet]
    lam = barycentric_polynomials(verts)
    for i, v in enumerate(verts):
        if v == node:
            return lam[i] * (2 * lam[i] - 1)
    for a in range(4):
        for b in range(a + 1, 4):
            mid = tuple((verts[a][d] + verts[b][d]) / 2 for d in range(3))
            if mid == node:
                return 4 * lam[a] * lam[b]
    raise ValueError("node is not a vertex or edge midpoint of this tetrahedron")


@lru_cache(maxsize=None)
def patch_basis(kind: NodeKind) -> PatchBasis:
    """Canonical patch geometry and the piecewise basis function for a class."""
    node, tets = _PATCHES[kind]
    node = _as_point(node)
    tets = tuple(tuple(_as_point(v) for v in tet) for tet in tets)
    pieces = tuple(_basis_on_tet(node, tet) for tet in tets)
    return PatchBasis(kind=kind, node=node, tets=tets, pieces=pieces)


def orthogonality_defect(
    kind: NodeKind, poly: MultiPoly
) -> tuple[Fraction, list[Fraction]]:
    """Per-tet values and sum of ``(grad(p - I2 p), grad(phi))`` on the patch.

    The sum is exactly zero whenever ``poly`` has degree at most three; for
    higher degrees it is generally a nonzero rational.
    """
    pb = patch_basis(kind)
    per_tet = []
    for tet, phi in zip(pb.tets, pb.pieces):
        diff = poly - p2_interpolate(poly, tet)
        integrand = MultiPoly()
        for axis in range(3):
            integrand = integrand + diff.partial(axis) * phi.partial(axis)
        per_tet.append(integrate_over_tet(integrand, tet))
    return sum(per_tet, Fraction(0)), per_tet


def cubic_monomials() -> list[tuple[int, int, int]]:
    """All 20 exponent triples of total degree at most three."""
    return [
        (a, b, c)
        for a in range(4)
        for b in range(4 - a)
        for c in range(4 - a - b)
        if a + b + c <= 3
    ]


def monomial_name(exps: tuple[int, int, int]) -> str:
    parts = [
        f"{v}^{e}" if e > 1 else v
        for v, e in zip("xyz", exps)
        if e
    ]
    return " ".join(parts) if parts else "1"


@dataclass(frozen=True)
class LemmaRecord:
    kind: NodeKind
    monomial: tuple[int, int, int]
    per_tet: tuple[Fraction, ...]
    total: Fraction

    def to_json_obj(self) -> dict:
        return {
            "class": self.kind.label,
            "monomial": monomial_name(self.monomial),
            "per_tet": [format_fraction(q) for q in self.per_tet],
            "total": format_fraction(self.total),
        }


@dataclass(frozen=True)
class LemmaReport:
    records: tuple[LemmaRecord, ...]

    @property
    def all_zero(self) -> bool:
        return all(r.total == 0 for r in self.records)

    def nonzero(self) -> list[LemmaRecord]:
        return [r for r in self.records if r.total != 0]

    def to_json_obj(self) -> list[dict]:
        return [r.to_json_obj() for r in self.records]


def verify_all_lemmas() -> LemmaReport:
    """Evaluate all four identities for every cubic monomial (80 totals).

    The full monomial set is covered, not just representatives reduced by
    the patch symmetries; nonzero totals are reported, never raised.
    """
    records = []
    for kind in KIND_ORDER:
        for exps in cubic_monomials():
            total, per_tet = orthogonality_defect(kind, MultiPoly.monomial(exps))
            records.append(
                LemmaRecord(kind=kind, monomial=exps, per_tet=tuple(per_tet), total=total)
            )
    return LemmaReport(records=tuple(records))
