"""
Nodal shape functions on the reference sub-elements

Quadratic triangle on (0,0), (1,0), (0,1), node order [v0, v1, v2, m01, m12, m20].
Biquadratic quad on [0,1]^2, node (a, b) at (a/2, b/2) stored at index a + 3*b.
"""
import numpy as np


def p2_shape(points):
    """Values (q, 6) and reference gradients (q, 6, 2) of the quadratic triangle"""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    x, y = points[:, 0], points[:, 1]
    l0, l1, l2 = 1.0 - x - y, x, y
    values = np.column_stack([
        l0 * (2.0 * l0 - 1.0),
        l1 * (2.0 * l1 - 1.0),
        l2 * (2.0 * l2 - 1.0),
        4.0 * l0 * l1,
        4.0 * l1 * l2,
        4.0 * l2 * l0,
    ])
    # d(l0) = (-1, -1), d(l1) = (1, 0), d(l2) = (0, 1)
    dx = np.column_stack([
        -(4.0 * l0 - 1.0),
        4.0 * l1 - 1.0,
        np.zeros_like(x),
        4.0 * (l0 - l1),
        4.0 * l2,
        -4.0 * l2,
    ])
    dy = np.column_stack([
        -(4.0 * l0 - 1.0),
        np.zeros_like(x),
        4.0 * l2 - 1.0,
        -4.0 * l1,
        4.0 * l1,
        4.0 * (l0 - l2),
    ])
    return values, np.stack([dx, dy], axis=-1)


def _lagrange_1d(t):
    values = np.column_stack([(1.0 - t) * (1.0 - 2.0 * t), 4.0 * t * (1.0 - t), t * (2.0 * t - 1.0)])
    derivatives = np.column_stack([4.0 * t - 3.0, 4.0 - 8.0 * t, 4.0 * t - 1.0])
    return values, derivatives


def q2_shape(points):
    """Values (q, 9) and reference gradients (q, 9, 2) of the biquadratic quad"""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    vx, dx = _lagrange_1d(points[:, 0])
    vy, dy = _lagrange_1d(points[:, 1])
    # index a + 3*b
    values = (vy[:, :, None] * vx[:, None, :]).reshape(len(points), 9)
    grad_x = (vy[:, :, None] * dx[:, None, :]).reshape(len(points), 9)
    grad_y = (dy[:, :, None] * vx[:, None, :]).reshape(len(points), 9)
    return values, np.stack([grad_x, grad_y], axis=-1)


def shape(cell, points):
    if cell == "triangle":
        return p2_shape(points)
    if cell == "quad":
        return q2_shape(points)
    raise ValueError(f"unknown cell type {cell!r}")


def quadratic_curve(p, m, q, t):
    """Points of the quadratic through p (t=0), m (t=1/2) and q (t=1)"""
    t = np.asarray(t, dtype=float)[..., None]
    return p * (1.0 - t) * (1.0 - 2.0 * t) + 4.0 * m * t * (1.0 - t) + q * t * (2.0 * t - 1.0)


def map_points(coords, values):
    """Physical points for element coordinates (E, n, 2) and shape values (q, n)"""
    return np.einsum("qn,ena->eqa", values, coords)


def jacobians(coords, gradients):
    """J[e, q, a, b] = d x_a / d xi_b"""
    return np.einsum("ena,qnb->eqab", coords, gradients)


def determinant(J):
    return J[..., 0, 0] * J[..., 1, 1] - J[..., 0, 1] * J[..., 1, 0]


def physical_gradients(J, gradients):
    """Shape gradients mapped by J^{-T}: returns (E, q, n, 2) and det (E, q)"""
    det = determinant(J)
    inv = np.empty_like(J)
    inv[..., 0, 0] = J[..., 1, 1]
    inv[..., 0, 1] = -J[..., 0, 1]
    inv[..., 1, 0] = -J[..., 1, 0]
    inv[..., 1, 1] = J[..., 0, 0]
    inv /= det[..., None, None]
    return np.einsum("qnb,eqba->eqna", gradients, inv), det
