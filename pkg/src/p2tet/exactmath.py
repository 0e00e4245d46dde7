"""Exact rational polynomial algebra on tetrahedra.

Everything in this module works over :class:`fractions.Fraction`, so results
carry no rounding error at all.  It is the independent oracle the
floating-point kernels are checked against, and it provides the machinery
for the patch orthogonality verifier: trivariate polynomials, affine
substitution, closed-form monomial integrals over tetrahedra, and quadratic
nodal interpolation on the 10-node tetrahedron.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Mapping, Sequence

Rational = Fraction

#: Local edge numbering of the 10-node quadratic tetrahedron: nodes 0..3 are
#: the vertices, node ``4 + e`` is the midpoint of edge ``P2_EDGES[e]``.
P2_EDGES = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))

_AXES = {"x": 0, "y": 1, "z": 2, 0: 0, 1: 1, 2: 2}


def format_fraction(value) -> str:
    """Render a rational as ``"num/den"``; zero renders as ``"0/1"``."""
    q = Fraction(value)
    return f"{q.numerator}/{q.denominator}"


def _point(coords) -> tuple[Fraction, Fraction, Fraction]:
    x, y, z = coords
    return (Fraction(x), Fraction(y), Fraction(z))


class MultiPoly:
    """Polynomial in x, y, z with exact rational coefficients.

    Coefficients live in a map from exponent triples ``(a, b, c)`` to
    :class:`Fraction`; zero coefficients are never stored, so two equal
    polynomials always compare equal.

    >>> p = MultiPoly.variable("x") ** 2
    >>> p(Fraction(1, 2), 0, 0)
    Fraction(1, 4)
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[tuple, int | Fraction] | None = None):
        clean: dict[tuple[int, int, int], Fraction] = {}
        if terms:
            for exps, coeff in terms.items():
                a, b, c = (int(e) for e in exps)
                if a < 0 or b < 0 or c < 0:
                    raise ValueError(f"negative exponent in {exps!r}")
                q = Fraction(coeff)
                if q:
                    clean[(a, b, c)] = q
        self.terms = clean

    # -- constructors ------------------------------------------------------

    @classmethod
    def constant(cls, value) -> "MultiPoly":
        return cls({(0, 0, 0): Fraction(value)})

    @classmethod
    def monomial(cls, exps, coeff=1) -> "MultiPoly":
        return cls({tuple(exps): Fraction(coeff)})

    @classmethod
    def variable(cls, axis) -> "MultiPoly":
        exps = [0, 0, 0]
        exps[_AXES[axis]] = 1
        return cls({tuple(exps): Fraction(1)})

    # -- ring operations ---------------------------------------------------

    @staticmethod
    def _coerce(other):
        if isinstance(other, MultiPoly):
            return other
        if isinstance(other, (int, Fraction)):
            return MultiPoly.constant(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out = dict(self.terms)
        for e, q in other.terms.items():
            s = out.get(e, Fraction(0)) + q
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return MultiPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly({e: -q for e, q in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            q = Fraction(other)
            if not q:
                return MultiPoly()
            return MultiPoly({e: c * q for e, c in self.terms.items()})
        if not isinstance(other, MultiPoly):
            return NotImplemented
        out: dict[tuple[int, int, int], Fraction] = {}
        for (a1, b1, c1), q1 in self.terms.items():
            for (a2, b2, c2), q2 in other.terms.items():
                e = (a1 + a2, b1 + b2, c1 + c2)
                s = out.get(e, Fraction(0)) + q1 * q2
                if s:
                    out[e] = s
                else:
                    out.pop(e, None)
        return MultiPoly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponent must be a nonnegative integer")
        result = MultiPoly.constant(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    # -- calculus and evaluation -------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        """Total degree; the zero polynomial reports -1."""
        if not self.terms:
            return -1
        return max(a + b + c for (a, b, c) in self.terms)

    def partial(self, axis) -> "MultiPoly":
        i = _AXES[axis]
        out = {}
        for e, q in self.terms.items():
            if e[i]:
                d = list(e)
                d[i] -= 1
                out[tuple(d)] = q * e[i]
        return MultiPoly(out)

    def grad(self) -> tuple["MultiPoly", "MultiPoly", "MultiPoly"]:
        return (self.partial(0), self.partial(1), self.partial(2))

    def laplacian(self) -> "MultiPoly":
        return sum((self.partial(i).partial(i) for i in range(3)), MultiPoly())

    def __call__(self, x, y, z):
        pt = (Fraction(x), Fraction(y), Fraction(z))
        total = Fraction(0)
        for (a, b, c), q in self.terms.items():
            total += q * pt[0] ** a * pt[1] ** b * pt[2] ** c
        return total

    def subs_affine(self, matrix, shift) -> "MultiPoly":
        """Compose with the affine map ``x -> matrix @ x + shift``."""
        images = []
        for i in range(3):
            row = {(0, 0, 0): Fraction(shift[i])}
            for j, axis in enumerate([(1, 0, 0), (0, 1, 0), (0, 0, 1)]):
                row[axis] = row.get(axis, Fraction(0)) + Fraction(matrix[i][j])
            images.append(MultiPoly(row))
        deg = max((max(e) for e in self.terms), default=0)
        powers = [[MultiPoly.constant(1)] for _ in range(3)]
        for i in range(3):
            for _ in range(deg):
                powers[i].append(powers[i][-1] * images[i])
        out = MultiPoly()
        for (a, b, c), q in self.terms.items():
            out = out + powers[0][a] * powers[1][b] * powers[2][c] * q
        return out

    def __repr__(self):
        if not self.terms:
            return "MultiPoly(0)"
        parts = []
        for e in sorted(self.terms, key=lambda t: (sum(t), t), reverse=True):
            q = self.terms[e]
            mono = "".join(
                f"{v}^{p}" if p > 1 else v
                for v, p in zip("xyz", e)
                if p
            )
            parts.append(f"{q}*{mono}" if mono else f"{q}")
        return "MultiPoly(" + " + ".join(parts) + ")"


#: The coordinate polynomials, for building expressions by hand.
X = MultiPoly.variable("x")
Y = MultiPoly.variable("y")
Z = MultiPoly.variable("z")


def invert_rational_matrix(matrix: Sequence[Sequence]) -> list[list[Fraction]]:
    """Exact inverse of a square rational matrix via Gauss-Jordan."""
    n = len(matrix)
    aug = [
        [Fraction(v) for v in row] + [Fraction(int(i == j)) for j in range(n)]
        for i, row in enumerate(matrix)
    ]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col]), None)
        if pivot is None:
            raise ValueError("singular matrix")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [v * inv for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [v - f * w for v, w in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def tet_signed_volume(tet) -> Fraction:
    """Signed volume of a tetrahedron given as four rational points."""
    v = [_point(p) for p in tet]
    e = [[v[i + 1][d] - v[0][d] for d in range(3)] for i in range(3)]
    det = (
        e[0][0] * (e[1][1] * e[2][2] - e[1][2] * e[2][1])
        - e[0][1] * (e[1][0] * e[2][2] - e[1][2] * e[2][0])
        + e[0][2] * (e[1][0] * e[2][1] - e[1][1] * e[2][0])
    )
    return det / 6


def integrate_over_tet(poly: MultiPoly, tet) -> Fraction:
    """Exact integral of ``poly`` over the tetrahedron ``tet``.

    Pulls the polynomial back to the reference tetrahedron
    ``{x, y, z >= 0, x + y + z <= 1}`` through the affine vertex map and
    applies the closed-form reference integral of each monomial,
    ``a! b! c! / (a + b + c + 3)!``.
    """
    v = [_point(p) for p in tet]
    matrix = [[v[j + 1][i] - v[0][i] for j in range(3)] for i in range(3)]
    det = 6 * tet_signed_volume(tet)
    if det == 0:
        raise ValueError("degenerate tetrahedron")
    pulled = poly.subs_affine(matrix, v[0])
    total = Fraction(0)
    for (a, b, c), q in pulled.terms.items():
        total += q * Fraction(
            math.factorial(a) * math.factorial(b) * math.factorial(c),
            math.factorial(a + b + c + 3),
        )
    return total * abs(det)


def barycentric_polynomials(tet) -> list[MultiPoly]:
    """The four affine functions equal to 1 at one vertex and 0 at the rest."""
    v = [_point(p) for p in tet]
    m = [[v[j][i] for j in range(4)] for i in range(3)]
    m.append([Fraction(1)] * 4)
    try:
        inv = invert_rational_matrix(m)
    except ValueError:
        raise ValueError("degenerate tetrahedron") from None
    lams = []
    for j in range(4):
        lams.append(
            MultiPoly(
                {
                    (1, 0, 0): inv[j][0],
                    (0, 1, 0): inv[j][1],
                    (0, 0, 1): inv[j][2],
                    (0, 0, 0): inv[j][3],
                }
            )
        )
    return lams


def p2_nodes(tet) -> list[tuple[Fraction, Fraction, Fraction]]:
    """The 10 quadratic nodes: vertices then edge midpoints (P2_EDGES order)."""
    v = [_point(p) for p in tet]
    nodes = list(v)
    for a, b in P2_EDGES:
        nodes.append(tuple((v[a][d] + v[b][d]) / 2 for d in range(3)))
    return nodes


def p2_basis_polynomials(tet) -> list[MultiPoly]:
    """Quadratic Lagrange basis on ``tet``, matching the p2_nodes ordering."""
    lam = barycentric_polynomials(tet)
    basis = [lam[i] * (2 * lam[i] - 1) for i in range(4)]
    basis.extend(4 * lam[a] * lam[b] for a, b in P2_EDGES)
    return basis


def p2_interpolate(poly: MultiPoly, tet) -> MultiPoly:
    """Quadratic nodal interpolant of ``poly`` on ``tet``.

    The result is the unique quadratic agreeing with ``poly`` at the four
    vertices and six edge midpoints.
    """
    basis = p2_basis_polynomials(tet)
    out = MultiPoly()
    for node, phi in zip(p2_nodes(tet), basis):
        value = poly(*node)
        if value:
            out = out + phi * value
    return out
