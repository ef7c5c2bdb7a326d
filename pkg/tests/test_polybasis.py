from math import comb, factorial, prod

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from c1vem.polybasis import (
    MAX_QUADRATURE_DEGREE,
    REFERENCE_MEASURE,
    ScaledMonomialBasis,
    basis_size,
    edge_gauss,
    eval_basis,
    grad_basis,
    hessian_basis,
    integrate,
    tetrahedron_rule,
    triangle_rule,
)

UNIT_CUBE_TETS = np.array(
    [
        [[0, 0, 0], [1, 0, 0], [1, 1, 0], [1, 1, 1]],
        [[0, 0, 0], [1, 1, 0], [0, 1, 0], [1, 1, 1]],
        [[0, 0, 0], [0, 1, 0], [0, 1, 1], [1, 1, 1]],
        [[0, 0, 0], [0, 1, 1], [0, 0, 1], [1, 1, 1]],
        [[0, 0, 0], [0, 0, 1], [1, 0, 1], [1, 1, 1]],
        [[0, 0, 0], [1, 0, 1], [1, 0, 0], [1, 1, 1]],
    ],
    dtype=float,
)
REF_TET = np.array([[[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]]], dtype=float)
REF_TRI = np.array([[[0, 0], [1, 0], [0, 1]]], dtype=float)


def simplex_moment(alpha):
    """Integral of prod x_i^alpha_i over the reference simplex."""
    num = prod(factorial(a) for a in alpha)
    return num / factorial(sum(alpha) + len(alpha))


@pytest.mark.parametrize("dim,degree", [(2, 1), (2, 2), (3, 1), (3, 2)])
def test_basis_count(dim, degree):
    """Monomial count is binomial(k + d, d)."""
    b = ScaledMonomialBasis(np.zeros(dim), 1.0, degree)
    assert len(b) == basis_size(dim, degree) == comb(degree + dim, dim)


def test_values_at_center():
    """Every basis is (1, 0, ...) at its center."""
    b = ScaledMonomialBasis(np.array([0.3, -1.0, 2.0]), 0.7)
    expected = np.zeros(10)
    expected[0] = 1
    np.testing.assert_array_equal(eval_basis(b, b.center), expected)


def test_values_graded_lex_order():
    """Order is 1, x, y, z, x^2, xy, xz, y^2, yz, z^2."""
    b = ScaledMonomialBasis(np.zeros(3), 1.0)
    np.testing.assert_array_equal(eval_basis(b, [1.0, 0, 0]), [1, 1, 0, 0, 1, 0, 0, 0, 0, 0])
    np.testing.assert_array_equal(eval_basis(b, [2.0, 3.0, 5.0]), [1, 2, 3, 5, 4, 6, 10, 9, 15, 25])


def test_scale_halves_linear_entries():
    """Scale 2 maps the point (1, 0, 0) to x-entry 0.5."""
    b = ScaledMonomialBasis(np.zeros(3), 2.0)
    assert eval_basis(b, [1.0, 0, 0])[1] == 0.5


def test_constant_gradient_is_zero():
    b = ScaledMonomialBasis(np.ones(3), 0.5)
    np.testing.assert_array_equal(grad_basis(b, [0.2, 0.1, 0.9])[0], np.zeros(3))


def test_hessian_of_x_squared():
    """Hessian of ((x - xc) / h)^2 is 2 / h^2 in the (x, x) slot."""
    h = 0.4
    b = ScaledMonomialBasis(np.array([1.0, 2.0, 3.0]), h)
    H = hessian_basis(b, [0.0, 0.0, 0.0])[4]
    expected = np.zeros((3, 3))
    expected[0, 0] = 2 / h**2
    np.testing.assert_allclose(H, expected, rtol=1e-15)


def test_monomials_bounded_in_half_ball():
    """Monomials are bounded by 1 in the ball of radius h / 2."""
    rng = np.random.default_rng(0)
    b = ScaledMonomialBasis(rng.normal(size=3), 1.3)
    d = rng.normal(size=(200, 3))
    d *= (rng.uniform(0, 1, 200) * b.scale / 2 / np.linalg.norm(d, axis=1))[:, None]
    assert np.abs(b.values(b.center + d)).max() <= 1.0


def test_wrong_dimension_raises():
    b = ScaledMonomialBasis(np.zeros(2), 1.0)
    with pytest.raises(ValueError):
        b.values(np.zeros(3))


@pytest.mark.parametrize("dim", [2, 3])
def test_finite_difference_derivatives(dim):
    """Gradients and Hessians match central differences with step 1e-5 h."""
    rng = np.random.default_rng(dim)
    h = 0.8
    b = ScaledMonomialBasis(rng.normal(size=dim), h)
    step = 1e-5 * h
    pts = b.center + rng.uniform(-h, h, size=(20, dim))
    G = b.gradients(pts)
    H = b.hessians(pts)
    for a in range(dim):
        e = np.zeros(dim)
        e[a] = step
        fd = (b.values(pts + e) - b.values(pts - e)) / (2 * step)
        assert np.abs(fd - G[:, :, a]).max() <= 1e-6
        fdg = (b.gradients(pts + e) - b.gradients(pts - e)) / (2 * step)
        assert np.abs(fdg - H[:, :, :, a]).max() <= 1e-6


@given(
    h=st.floats(0.05, 20.0),
    center=st.lists(st.floats(-5, 5), min_size=3, max_size=3),
    point=st.lists(st.floats(-1, 1), min_size=3, max_size=3),
)
def test_gradient_scales_with_diameter(h, center, point):
    """Gradient on a diameter-h basis is 1/h times the unit-basis gradient at the mapped point."""
    c = np.array(center)
    p = np.array(point)
    unit = ScaledMonomialBasis(np.zeros(3), 1.0)
    scaled = ScaledMonomialBasis(c, h)
    g_unit = unit.gradients(p)
    g_scaled = scaled.gradients(c + h * p)
    np.testing.assert_allclose(g_scaled, g_unit / h, rtol=1e-13, atol=1e-13 * np.abs(g_unit).max() / h)


@pytest.mark.parametrize("degree", range(0, MAX_QUADRATURE_DEGREE + 1, 3))
def test_tetrahedron_rule_exactness(degree):
    """Every monomial up to the exactness degree is integrated to 1e-13 relative."""
    rule = tetrahedron_rule(degree)
    assert np.isclose(rule.weights.sum(), REFERENCE_MEASURE["tetrahedron"], rtol=1e-14)
    x, y, z = rule.points[:, 1], rule.points[:, 2], rule.points[:, 3]
    for a in range(degree + 1):
        for b in range(degree + 1 - a):
            for c in range(degree + 1 - a - b):
                got = rule.weights @ (x**a * y**b * z**c)
                exact = simplex_moment((a, b, c))
                assert abs(got - exact) <= 1e-13 * exact


@pytest.mark.parametrize("degree", range(0, MAX_QUADRATURE_DEGREE + 1))
def test_triangle_rule_exactness(degree):
    rule = triangle_rule(degree)
    assert np.isclose(rule.weights.sum(), REFERENCE_MEASURE["triangle"], rtol=1e-14)
    x, y = rule.points[:, 1], rule.points[:, 2]
    for a in range(degree + 1):
        for b in range(degree + 1 - a):
            exact = simplex_moment((a, b))
            assert abs(rule.weights @ (x**a * y**b) - exact) <= 1e-13 * exact


@pytest.mark.parametrize("npoints", range(1, 11))
def test_edge_gauss_exactness(npoints):
    rule = edge_gauss(npoints)
    t = rule.points[:, 1]
    assert rule.degree == 2 * npoints - 1
    for k in range(rule.degree + 1):
        assert abs(rule.weights @ t**k - 1 / (k + 1)) <= 1e-14


def test_edge_gauss_examples():
    assert edge_gauss(2).weights @ edge_gauss(2).points[:, 1] ** 3 == pytest.approx(0.25, abs=1e-15)
    assert edge_gauss(3).weights @ edge_gauss(3).points[:, 1] ** 4 == pytest.approx(0.2, abs=1e-15)
    one = edge_gauss(1)
    assert one.weights @ one.points[:, 1] ** 2 == pytest.approx(0.25)


@pytest.mark.parametrize("npoints", [0, 11])
def test_edge_gauss_range(npoints):
    with pytest.raises(ValueError):
        edge_gauss(npoints)


def test_integrate_examples():
    assert integrate(lambda p: np.ones(len(p)), UNIT_CUBE_TETS, 0) == pytest.approx(1.0, rel=1e-14)
    assert integrate(lambda p: p[:, 0], REF_TET, 1) == pytest.approx(1 / 24, rel=1e-14)
    val = integrate(lambda p: (p[:, 0] * p[:, 1] * p[:, 2]) ** 2, UNIT_CUBE_TETS, 6)
    assert val == pytest.approx(1 / 27, rel=1e-13)


def test_integrate_triangles_and_vector_values():
    """Planar triangles and vector-valued integrands keep the trailing shape."""
    val = integrate(lambda p: np.column_stack([np.ones(len(p)), p[:, 0]]), REF_TRI, 2)
    np.testing.assert_allclose(val, [0.5, 1 / 6], rtol=1e-14)


def test_unavailable_degree():
    with pytest.raises(ValueError, match="unavailable"):
        tetrahedron_rule(MAX_QUADRATURE_DEGREE + 1)
    with pytest.raises(ValueError):
        integrate(lambda p: p[:, 0], REF_TET, -1)
