"""
Quadrature rules on the reference triangle (0,0), (1,0), (0,1) and the
reference square [0,1]^2
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

import numpy as np


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray  # (n, 2) reference coordinates
    weights: np.ndarray  # (n,) summing to the reference area
    degree: int
    cell: str  # "triangle" or "quad"

    def __len__(self):
        return len(self.weights)


def _orbit(barycentric, weight):
    """Distinct permutations of a barycentric point, returned as (x, y) = (l1, l2)"""
    points = sorted(set(permutations(barycentric)))
    return [(p[1], p[2]) for p in points], [weight] * len(points)


def _symmetric_rule(orbits, degree):
    points, weights = [], []
    for barycentric, weight in orbits:
        p, w = _orbit(barycentric, weight)
        points.extend(p)
        weights.extend(w)
    # tabulated weights are normalised to 1, the triangle has area 1/2
    return QuadratureRule(np.array(points), 0.5 * np.array(weights), degree, "triangle")


def _centroid():
    return (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)


def _aa(a):
    return (a, a, 1.0 - 2.0 * a)


_S15 = np.sqrt(15.0)

_TRIANGLE_ORBITS = {
    1: [(_centroid(), 1.0)],
    2: [(_aa(1.0 / 6.0), 1.0 / 3.0)],
    4: [
        (_aa(0.44594849091596488632), 0.22338158967801146570),
        (_aa(0.09157621350977074346), 0.10995174365532186764),
    ],
    5: [
        (_centroid(), 9.0 / 40.0),
        (_aa((6.0 - _S15) / 21.0), (155.0 - _S15) / 1200.0),
        (_aa((6.0 + _S15) / 21.0), (155.0 + _S15) / 1200.0),
    ],
    8: [
        (_centroid(), 0.144315607677787),
        (_aa(0.459292588292723), 0.095091634267285),
        (_aa(0.170569307751760), 0.103217370534718),
        (_aa(0.050547228317031), 0.032458497623198),
        ((0.008394777409958, 0.263112829634638, 0.728492392955404), 0.027230314174435),
    ],
}


def triangle_rule(degree: int) -> QuadratureRule:
    """Smallest tabulated symmetric rule exact for polynomials of the given degree"""
    for available in sorted(_TRIANGLE_ORBITS):
        if available >= degree:
            return _symmetric_rule(_TRIANGLE_ORBITS[available], available)
    raise ValueError(f"no triangle rule of degree {degree}")


def quad_rule(n: int) -> QuadratureRule:
    """n x n tensor Gauss-Legendre rule on [0,1]^2, exact to degree 2n - 1"""
    x, w = np.polynomial.legendre.leggauss(n)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    px, py = np.meshgrid(x, x, indexing="xy")
    wx, wy = np.meshgrid(w, w, indexing="xy")
    return QuadratureRule(np.column_stack([px.ravel(), py.ravel()]), (wx * wy).ravel(), 2 * n - 1, "quad")


def refine_rule(rule: QuadratureRule) -> QuadratureRule:
    """Apply the rule on the four congruent children of the reference cell"""
    if rule.cell == "triangle":
        # children as (offset, linear map columns)
        children = [
            ((0.0, 0.0), ((0.5, 0.0), (0.0, 0.5))),
            ((0.5, 0.0), ((0.5, 0.0), (0.0, 0.5))),
            ((0.0, 0.5), ((0.5, 0.0), (0.0, 0.5))),
            ((0.5, 0.5), ((-0.5, 0.0), (0.0, -0.5))),
        ]
    else:
        children = [((ox, oy), ((0.5, 0.0), (0.0, 0.5))) for oy in (0.0, 0.5) for ox in (0.0, 0.5)]
    points, weights = [], []
    for offset, columns in children:
        B = np.array(columns).T
        points.append(np.asarray(offset) + rule.points @ B.T)
        weights.append(rule.weights * abs(np.linalg.det(B)))
    return QuadratureRule(np.vstack(points), np.concatenate(weights), rule.degree, rule.cell)


# Rules used by assembly and error evaluation
STRAIGHT_TRIANGLE_DEGREE = 4
CURVED_TRIANGLE_DEGREE = 5
ERROR_TRIANGLE_DEGREE = 8
STIFFNESS_QUAD_POINTS = 3
ERROR_QUAD_POINTS = 5
