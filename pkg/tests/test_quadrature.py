from math import factorial

import numpy as np
import pytest

from fem.quadrature import quad_rule, refine_rule, triangle_rule
from fem.shape_functions import p2_shape, q2_shape, quadratic_curve


def _triangle_monomial(a, b):
    return factorial(a) * factorial(b) / factorial(a + b + 2)


@pytest.mark.parametrize("degree", [1, 2, 4, 5, 8])
def test_triangle_rules_integrate_monomials(degree):
    rule = triangle_rule(degree)
    x, y = rule.points[:, 0], rule.points[:, 1]
    for a in range(degree + 1):
        for b in range(degree + 1 - a):
            assert abs(rule.weights @ (x ** a * y ** b) - _triangle_monomial(a, b)) < 1e-13


def test_triangle_rule_rounds_degree_up():
    assert triangle_rule(3).degree == 4
    assert triangle_rule(6).degree == 8
    with pytest.raises(ValueError):
        triangle_rule(20)


@pytest.mark.parametrize("n", [3, 5])
def test_quad_rule_is_tensor_exact(n):
    rule = quad_rule(n)
    x, y = rule.points[:, 0], rule.points[:, 1]
    for a in range(2 * n):
        for b in range(2 * n):
            assert abs(rule.weights @ (x ** a * y ** b) - 1.0 / ((a + 1) * (b + 1))) < 1e-13


def test_refined_rules_keep_exactness():
    for rule in (triangle_rule(4), quad_rule(3)):
        refined = refine_rule(rule)
        assert len(refined) == 4 * len(rule)
        x, y = refined.points[:, 0], refined.points[:, 1]
        exact = _triangle_monomial(2, 2) if rule.cell == "triangle" else 1.0 / 9.0
        assert abs(refined.weights @ (x ** 2 * y ** 2) - exact) < 1e-14


def test_p2_nodal_property_and_partition_of_unity():
    nodes = np.array([[0, 0], [1, 0], [0, 1], [0.5, 0], [0.5, 0.5], [0, 0.5]])
    values, gradients = p2_shape(nodes)
    np.testing.assert_allclose(values, np.eye(6), atol=1e-15)
    values, gradients = p2_shape(triangle_rule(4).points)
    np.testing.assert_allclose(values.sum(axis=1), 1.0, atol=1e-14)
    np.testing.assert_allclose(gradients.sum(axis=1), 0.0, atol=1e-13)


def test_q2_nodal_property():
    b, a = np.divmod(np.arange(9), 3)
    values, gradients = q2_shape(np.column_stack([a, b]) / 2.0)
    np.testing.assert_allclose(values, np.eye(9), atol=1e-15)
    np.testing.assert_allclose(gradients.sum(axis=1), 0.0, atol=1e-13)


def test_quadratic_curve_interpolates():
    p, m, q = np.array([0.0, 0.0]), np.array([0.5, 0.2]), np.array([1.0, 0.0])
    np.testing.assert_allclose(quadratic_curve(p, m, q, [0.0, 0.5, 1.0]), [p, m, q])
