"""
Assembly of the discrete bilinear form and load functional
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional, Tuple

import numpy as np
import scipy.sparse as sp

import config
from .exceptions import NonPositiveJacobian
from .fe_space import ElementBlock, FiniteElementSpace
from .level_set import LevelSetField
from .patch_mesh import Curvature, MeshModel
from .quadrature import (CURVED_TRIANGLE_DEGREE, STIFFNESS_QUAD_POINTS, STRAIGHT_TRIANGLE_DEGREE,
                         QuadratureRule, quad_rule, triangle_rule)
from .shape_functions import jacobians, map_points, physical_gradients, shape

logger = logging.getLogger(__name__)


@dataclass
class ProblemSpec:
    """
    -div(nu_i grad u) = f_i on subdomain i, u = g on the boundary. The exact
    branches u_i are only needed for error evaluation.
    """
    nu1: float
    nu2: float
    f1: Callable
    f2: Callable
    g: Callable
    level_set: LevelSetField
    u1: Optional[Callable] = None
    u2: Optional[Callable] = None
    grad_u1: Optional[Callable] = None
    grad_u2: Optional[Callable] = None

    def __post_init__(self):
        if self.nu1 <= 0 or self.nu2 <= 0:
            raise ValueError("diffusion coefficients must be positive")

    def nu(self, side):
        return np.where(np.asarray(side) == 1, self.nu1, self.nu2)

    def source(self, side, x):
        """f_1 on side 1 and f_2 on side 2; side broadcasts against x[..., 0]"""
        return np.where(side == 1, self.f1(x), self.f2(x))

    def exact(self, side, x):
        return np.where(side == 1, self.u1(x), self.u2(x))

    def exact_gradient(self, side, x):
        return np.where((side == 1)[..., None], self.grad_u1(x), self.grad_u2(x))


@dataclass
class LinearSystem:
    matrix: sp.csr_matrix
    rhs: np.ndarray
    constrained_dofs: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    constrained_values: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def size(self):
        return self.matrix.shape[0]

    @property
    def free_dofs(self):
        mask = np.ones(self.size, dtype=bool)
        mask[self.constrained_dofs] = False
        return np.flatnonzero(mask)

    def __repr__(self):
        return f"<LinearSystem(size={self.size}, nnz={self.matrix.nnz}, constrained={len(self.constrained_dofs)})>"


@dataclass
class ElementGeometry:
    values: np.ndarray  # (q, n)
    gradients: np.ndarray  # (E, q, n, 2) physical
    det: np.ndarray  # (E, q)
    points: np.ndarray  # (E, q, 2)


def element_geometry(coords, cell: str, rule: QuadratureRule) -> ElementGeometry:
    values, ref_gradients = shape(cell, rule.points)
    J = jacobians(coords, ref_gradients)
    gradients, det = physical_gradients(J, ref_gradients)
    if np.any(det <= 0.0):
        raise NonPositiveJacobian(f"{int(np.sum(np.any(det <= 0.0, axis=1)))} {cell} element(s) "
                                  f"with non-positive Jacobian, min det {det.min():.3e}")
    return ElementGeometry(values, gradients, det, map_points(coords, values))


def integration_groups(space: FiniteElementSpace) -> Iterator[Tuple[ElementBlock, QuadratureRule]]:
    """Sub-element blocks paired with the rule used for the stiffness and load integrals"""
    if len(space.quads):
        yield space.quads, quad_rule(STIFFNESS_QUAD_POINTS)
    triangles = space.triangles
    if len(triangles):
        curved = triangles.curvature == int(Curvature.QUADRATIC)
        if np.any(~curved):
            yield triangles.subset(~curved), triangle_rule(STRAIGHT_TRIANGLE_DEGREE)
        if np.any(curved):
            yield triangles.subset(curved), triangle_rule(CURVED_TRIANGLE_DEGREE)


def chunks(n, size=None):
    size = size or config.ASSEMBLY_CHUNK
    for start in range(0, n, size):
        yield slice(start, min(start + size, n))


def assemble_stiffness(mesh: MeshModel, space: FiniteElementSpace, spec: ProblemSpec) -> sp.csr_matrix:
    """A[i, j] = sum over sub-elements of nu_side * int grad phi_j . grad phi_i"""
    n = space.total_dofs
    rows, cols, data = [], [], []
    for block, rule in integration_groups(space):
        for part in chunks(len(block)):
            geo = element_geometry(block.coords[part], block.cell, rule)
            weight = rule.weights[None, :] * geo.det * spec.nu(block.side[part])[:, None]
            local = np.einsum("eq,eqia,eqja->eij", weight, geo.gradients, geo.gradients)
            dofs = block.dofs[part]
            k = dofs.shape[1]
            rows.append(np.repeat(dofs, k, axis=1).ravel())
            cols.append(np.tile(dofs, (1, k)).ravel())
            data.append(local.ravel())
    if not data:
        return sp.csr_matrix((n, n))
    A = sp.coo_matrix((np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(n, n)).tocsr()
    # mirror the upper triangle
    upper = sp.triu(A, format="csr")
    A = (upper + sp.triu(A, k=1, format="csr").T).tocsr()
    logger.debug("stiffness matrix: %d dofs, %d non-zeros", n, A.nnz)
    return A


def assemble_load(mesh: MeshModel, space: FiniteElementSpace, spec: ProblemSpec) -> np.ndarray:
    """b[i] = sum over sub-elements of int f_side phi_i"""
    n = space.total_dofs
    rhs = np.zeros(n)
    for block, rule in integration_groups(space):
        for part in chunks(len(block)):
            geo = element_geometry(block.coords[part], block.cell, rule)
            f = spec.source(block.side[part][:, None], geo.points)
            local = np.einsum("q,eq,eq,qi->ei", rule.weights, geo.det, f, geo.values)
            rhs += np.bincount(block.dofs[part].ravel(), weights=local.ravel(), minlength=n)
    return rhs


def assemble_system(mesh: MeshModel, space: FiniteElementSpace, spec: ProblemSpec) -> LinearSystem:
    return LinearSystem(assemble_stiffness(mesh, space, spec), assemble_load(mesh, space, spec))


def apply_dirichlet(system: LinearSystem, g: Callable, space: FiniteElementSpace, dofs=None) -> LinearSystem:
    """
    Symmetric elimination of prescribed values: constrained rows and columns
    become identity, known values move to the right-hand side.

    Args:
        g: vectorised boundary function of points (k, 2)
        dofs: dofs to constrain, the boundary of the domain by default
    """
    dofs = space.dofmap.boundary_dofs if dofs is None else np.asarray(dofs, dtype=int)
    values = np.asarray(g(space.node_coordinates[dofs]), dtype=float) * np.ones(len(dofs))
    n = system.size
    constrained = np.zeros(n, dtype=bool)
    constrained[dofs] = True

    known = np.zeros(n)
    known[dofs] = values
    rhs = system.rhs - system.matrix @ known
    rhs[dofs] = values

    free = sp.diags((~constrained).astype(float))
    matrix = free @ system.matrix @ free + sp.diags(constrained.astype(float))
    return LinearSystem(sp.csr_matrix(matrix), rhs, dofs, values)
