"""Uniform six-tetrahedra-per-cube meshes of the unit cube.

The unit cube is split into ``n^3`` axis-aligned cubes of edge ``h = 1/n``;
each cube is cut into the six tetrahedra ``{0 <= t_s(1) <= t_s(2) <= t_s(3) <= h}``
(cube-local coordinates), one per coordinate permutation.  Every tetrahedron
shares the cube's main diagonal, every face of every cube carries exactly one
diagonal, and the pattern is identical in all cubes, so the decomposition is
translation invariant.

Quadratic nodes live on the half-spacing lattice: every point ``(i,j,k)*h/2``
is either a mesh vertex, an axis-edge midpoint, a face-diagonal midpoint, or
a cube-diagonal midpoint.  Node indices are lexicographic with the last axis
fastest, which keeps index<->coordinate maps O(1) and the assembled matrix
banded.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import cached_property

import numpy as np

from .exactmath import P2_EDGES

#: Vertex chains of the six cube tetrahedra in cube-local integer
#: coordinates.  Slot s is the region where the coordinates sorted by the
#: s-th permutation increase; vertex order is arranged so each chain has
#: positive orientation, and vertices 0 and 3 are always the ends of the
#: cube's main diagonal.
KUHN_TETS = np.array(
    [
        [[0, 0, 0], [1, 0, 0], [1, 1, 0], [1, 1, 1]],  # z <= y <= x
        [[0, 0, 0], [1, 1, 0], [0, 1, 0], [1, 1, 1]],  # z <= x <= y
        [[0, 0, 0], [0, 1, 0], [0, 1, 1], [1, 1, 1]],  # x <= z <= y
        [[0, 0, 0], [0, 1, 1], [0, 0, 1], [1, 1, 1]],  # x <= y <= z
        [[0, 0, 0], [0, 0, 1], [1, 0, 1], [1, 1, 1]],  # y <= x <= z
        [[0, 0, 0], [1, 0, 1], [1, 0, 0], [1, 1, 1]],  # y <= z <= x
    ],
    dtype=np.int64,
)

#: Largest admissible subdivision: node indices must fit in int32.
MAX_CUBES_PER_AXIS = 644


class NodeKind(Enum):
    """Parity class of a half-lattice node (count of odd coordinates)."""

    VERTEX = "Vertex"
    EDGE_MID = "EdgeMid"
    SQUARE_MID = "SquareMid"
    CUBE_MID = "CubeMid"

    @property
    def label(self) -> str:
        return self.value


_KIND_BY_ODD_COUNT = (
    NodeKind.VERTEX,
    NodeKind.EDGE_MID,
    NodeKind.SQUARE_MID,
    NodeKind.CUBE_MID,
)


@dataclass(frozen=True)
class NodeClass:
    kind: NodeKind
    interior: bool


@dataclass(frozen=True)
class Tetrahedron:
    """One mesh tetrahedron: vertex indices, owning cube, and slot 1..6."""

    vertices: tuple[int, int, int, int]
    cube: int
    slot: int


class Mesh:
    """Immutable uniform tetrahedral mesh of the unit cube.

    Construction is single-threaded; afterwards every accessor is read-only,
    so a mesh can be shared freely across threads.
    """

    def __init__(self, n: int):
        if not isinstance(n, int) or n < 1:
            raise ValueError(f"cubes per axis must be a positive integer, got {n!r}")
        if n > MAX_CUBES_PER_AXIS:
            raise ValueError(
                f"n={n} would overflow 32-bit node indices "
                f"((2n+1)^3 > 2^31), max is {MAX_CUBES_PER_AXIS}"
            )
        self.n = n
        self.h = 1.0 / n
        self.h_exact = Fraction(1, n)

    # -- sizes ---------------------------------------------------------------

    @property
    def num_cubes(self) -> int:
        return self.n**3

    @property
    def num_tets(self) -> int:
        return 6 * self.n**3

    @property
    def num_vertices(self) -> int:
        return (self.n + 1) ** 3

    @property
    def num_nodes(self) -> int:
        """Quadratic nodes: the full half-spacing lattice."""
        return (2 * self.n + 1) ** 3

    # -- geometry arrays -------------------------------------------------------

    @cached_property
    def cube_corners(self) -> np.ndarray:
        """(num_cubes, 3) integer corner coordinates, lexicographic order."""
        n = self.n
        return np.indices((n, n, n)).reshape(3, -1).T.astype(np.int64)

    @cached_property
    def vertices(self) -> np.ndarray:
        """(num_vertices, 3) float coordinates of the cube-lattice points."""
        k = self.n + 1
        return np.indices((k, k, k)).reshape(3, -1).T * self.h

    @cached_property
    def tet_vertex_ids(self) -> np.ndarray:
        """(num_tets, 4) vertex indices; tet ``6*cube + slot - 1``."""
        n = self.n
        k = n + 1
        strides = np.array([k * k, k, 1], dtype=np.int64)
        out = np.empty((self.num_tets, 4), dtype=np.int32)
        for s in range(6):
            coords = self.cube_corners[:, None, :] + KUHN_TETS[s][None, :, :]
            out[s::6] = coords @ strides
        return out

    @cached_property
    def tets(self) -> list[Tetrahedron]:
        ids = self.tet_vertex_ids
        return [self.tet(t) for t in range(self.num_tets)]

    def tet(self, index: int) -> Tetrahedron:
        ids = self.tet_vertex_ids[index]
        return Tetrahedron(tuple(int(v) for v in ids), index // 6, index % 6 + 1)

    def tet_coords(self, index: int) -> np.ndarray:
        """(4, 3) float vertex coordinates of one tetrahedron."""
        return self.vertices[self.tet_vertex_ids[index]]

    # -- quadratic nodes -------------------------------------------------------

    @cached_property
    def node_triples(self) -> np.ndarray:
        """(num_nodes, 3) half-lattice integer coordinates."""
        m = 2 * self.n + 1
        return np.indices((m, m, m)).reshape(3, -1).T.astype(np.int32)

    @cached_property
    def node_coords(self) -> np.ndarray:
        """(num_nodes, 3) float coordinates of the quadratic nodes."""
        return self.node_triples * (self.h / 2)

    @cached_property
    def boundary_mask(self) -> np.ndarray:
        """True for nodes on the boundary of the unit cube."""
        t = self.node_triples
        top = 2 * self.n
        return ((t == 0) | (t == top)).any(axis=1)

    def node_index(self, i: int, j: int, k: int) -> int:
        m = 2 * self.n + 1
        if not (0 <= i < m and 0 <= j < m and 0 <= k < m):
            raise IndexError(f"half-lattice triple {(i, j, k)} out of range")
        return (i * m + j) * m + k

    def node_triple(self, index: int) -> tuple[int, int, int]:
        m = 2 * self.n + 1
        if not (0 <= index < self.num_nodes):
            raise IndexError(f"node index {index} out of range")
        i, rem = divmod(index, m * m)
        j, k = divmod(rem, m)
        return (i, j, k)

    @cached_property
    def element_nodes(self) -> np.ndarray:
        """(num_tets, 10) quadratic-node indices per tetrahedron.

        Local order matches the reference element: four vertices, then the
        six edge midpoints in ``P2_EDGES`` order.
        """
        m = 2 * self.n + 1
        strides = np.array([m * m, m, 1], dtype=np.int64)
        out = np.empty((self.num_tets, 10), dtype=np.int32)
        for s in range(6):
            vh = 2 * (self.cube_corners[:, None, :] + KUHN_TETS[s][None, :, :])
            nodes = np.empty((vh.shape[0], 10, 3), dtype=np.int64)
            nodes[:, :4] = vh
            for e, (a, b) in enumerate(P2_EDGES):
                nodes[:, 4 + e] = (vh[:, a] + vh[:, b]) // 2
            out[s::6] = nodes @ strides
        return out

    # -- I/O --------------------------------------------------------------------

    def write_tets(self, path) -> None:
        """Plain-text dump: one line per tet, twelve vertex coordinates."""
        coords = self.vertices[self.tet_vertex_ids]
        with open(path, "w") as fh:
            for tet in coords:
                fh.write(" ".join(f"{c:.17g}" for c in tet.ravel()) + "\n")

    def __repr__(self):
        return f"Mesh(n={self.n}, tets={self.num_tets}, nodes={self.num_nodes})"


def build_uniform_mesh(n: int) -> Mesh:
    """Mesh the unit cube with ``n`` cubes per axis, six tets per cube."""
    return Mesh(n)


def classify_node(mesh: Mesh, index: int) -> NodeClass:
    """Parity class of a node plus an interiority flag.

    A node is interior exactly when it lies off the domain boundary; such a
    node always carries the complete support patch of its class (6, 4, 6 or
    24 tetrahedra), whereas boundary nodes have truncated patches.
    """
    triple = mesh.node_triple(index)
    odd = sum(c & 1 for c in triple)
    return NodeClass(_KIND_BY_ODD_COUNT[odd], interior=not bool(mesh.boundary_mask[index]))


def support_patch(mesh: Mesh, index: int) -> list[Tetrahedron]:
    """All tetrahedra on which the node's global basis function is nonzero.

    These are exactly the tets having the node among their ten quadratic
    nodes; only the (up to eight) cubes touching the node need checking.
    """
    i, j, k = mesh.node_triple(index)
    n = mesh.n
    ranges = []
    for d in (i, j, k):
        # cube c spans half-coordinates [2c, 2c+2]
        lo = max(0, -(-(d - 2) // 2))
        hi = min(n - 1, d // 2)
        ranges.append(range(lo, hi + 1))
    en = mesh.element_nodes
    out = []
    for cx in ranges[0]:
        for cy in ranges[1]:
            for cz in ranges[2]:
                cube = (cx * n + cy) * n + cz
                for s in range(6):
                    t = 6 * cube + s
                    if index in en[t]:
                        out.append(mesh.tet(t))
    return out
