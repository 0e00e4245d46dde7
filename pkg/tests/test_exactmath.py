from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from p2tet.exactmath import (
    MultiPoly,
    X,
    Y,
    Z,
    format_fraction,
    integrate_over_tet,
    invert_rational_matrix,
    p2_basis_polynomials,
    p2_interpolate,
    p2_nodes,
    tet_signed_volume,
)
from p2tet.fem import tet_quadrature

REF_TET = ((0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1))
# first tetrahedron of the canonical cube-center patch
T1 = ((0, 0, 0), (1, 0, 0), (1, 1, 0), (1, 1, 1))


def test_partial_derivative():
    assert (X**3).partial("x") == 3 * X**2
    assert (X * Y * Z).grad() == (Y * Z, X * Z, X * Y)


def test_product_matches_piecewise_basis_formula():
    assert (X - 1) * (-4 * Z) == -4 * X * Z + 4 * Z


def test_affine_substitution_shift():
    shifted = (X**2).subs_affine([[1, 0, 0], [0, 1, 0], [0, 0, 1]], [1, 0, 0])
    assert shifted == X**2 + 2 * X + 1


def test_pow_and_equality():
    p = (X + Y) ** 2
    assert p == X**2 + 2 * X * Y + Y**2
    assert (X - X).is_zero
    assert MultiPoly().degree() == -1


def test_exact_evaluation():
    p = X**2 * Z - Y
    assert p(F(1, 2), F(1, 3), 2) == F(1, 2) ** 2 * 2 - F(1, 3)


def test_reference_integrals():
    one = MultiPoly.constant(1)
    assert integrate_over_tet(one, REF_TET) == F(1, 6)
    assert integrate_over_tet(X, REF_TET) == F(1, 24)
    assert integrate_over_tet(X * Y * Z, REF_TET) == F(1, 720)


def test_degenerate_tet_rejected():
    flat = ((0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, 0))
    with pytest.raises(ValueError, match="degenerate"):
        integrate_over_tet(X, flat)
    with pytest.raises(ValueError, match="degenerate"):
        p2_interpolate(X, flat)


def test_signed_volume_orientation():
    assert tet_signed_volume(REF_TET) == F(1, 6)
    swapped = (REF_TET[0], REF_TET[2], REF_TET[1], REF_TET[3])
    assert tet_signed_volume(swapped) == -F(1, 6)


def test_invert_rational_matrix():
    m = [[2, 1], [1, 2]]
    assert invert_rational_matrix(m) == [[F(2, 3), -F(1, 3)], [-F(1, 3), F(2, 3)]]
    with pytest.raises(ValueError, match="singular"):
        invert_rational_matrix([[1, 2], [2, 4]])


def test_format_fraction():
    assert format_fraction(F(-1, 30)) == "-1/30"
    assert format_fraction(0) == "0/1"


def test_p2_basis_is_nodal():
    basis = p2_basis_polynomials(T1)
    nodes = p2_nodes(T1)
    for i, phi in enumerate(basis):
        for j, node in enumerate(nodes):
            assert phi(*node) == (1 if i == j else 0)


def test_interpolation_reproduces_quadratics():
    monos = [(a, b, c) for a in range(3) for b in range(3 - a) for c in range(3 - a - b)]
    for exps in monos:
        p = MultiPoly.monomial(exps)
        assert p2_interpolate(p, T1) == p


def test_interpolation_is_a_projection():
    p = X**3 + 2 * X * Y * Z - Y**2
    once = p2_interpolate(p, T1)
    assert p2_interpolate(once, T1) == once


def test_cubic_interpolation_differences():
    # the two canonical difference formulas for cubics on T1
    d = X**3 - p2_interpolate(X**3, T1)
    assert d == X * (X - 1) * (2 * X - 1) * F(1, 2)
    d = X * Y * Z - p2_interpolate(X * Y * Z, T1)
    assert d == Z * (X - 1) * (2 * Y - 1) * F(1, 2)


def test_gradient_orthogonality_integral_on_t1():
    # exact value of the cube-center defect integral on the first patch tet
    phi = 4 * Z * (1 - X)
    d = X**3 - p2_interpolate(X**3, T1)
    integrand = MultiPoly()
    for ax in range(3):
        integrand = integrand + d.partial(ax) * phi.partial(ax)
    assert integrate_over_tet(integrand, T1) == -F(1, 60)


@st.composite
def rational_points(draw):
    return tuple(
        F(draw(st.integers(-6, 6)), draw(st.integers(1, 6))) for _ in range(3)
    )


@settings(max_examples=25, deadline=None)
@given(
    weights=st.tuples(*(st.integers(1, 9) for _ in range(4))),
    exps=st.tuples(st.integers(0, 2), st.integers(0, 2), st.integers(0, 2)),
)
def test_integral_additive_under_vertex_split(weights, exps):
    total = sum(weights)
    interior = tuple(
        sum(F(w, total) * F(REF_TET[i][d]) for i, w in enumerate(weights))
        for d in range(3)
    )
    p = MultiPoly.monomial(exps)
    whole = integrate_over_tet(p, REF_TET)
    parts = F(0)
    for k in range(4):
        sub = list(REF_TET)
        sub[k] = interior
        parts += integrate_over_tet(p, sub)
    assert parts == whole


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 9999))
def test_integration_cross_checks_quadrature(seed):
    rng = np.random.default_rng(seed)
    exps = [(a, b, c) for a in range(7) for b in range(7 - a) for c in range(7 - a - b)]
    chosen = [exps[i] for i in rng.choice(len(exps), size=5, replace=False)]
    coeffs = rng.integers(-9, 10, size=5)
    poly = MultiPoly({e: int(c) for e, c in zip(chosen, coeffs)})
    exact = float(integrate_over_tet(poly, T1))
    rule = tet_quadrature(6)
    tet = np.array(T1, dtype=float)
    jac = (tet[1:] - tet[0]).T
    pts = tet[0] + rule.points @ jac.T
    vals = np.zeros(len(pts))
    for (a, b, c), q in poly.terms.items():
        vals += float(q) * pts[:, 0] ** a * pts[:, 1] ** b * pts[:, 2] ** c
    approx = float(abs(np.linalg.det(jac)) * (rule.weights @ vals))
    assert approx == pytest.approx(exact, rel=1e-13, abs=1e-15)
