"""
Finite element space on an adapted patch mesh

The reference patch is the unit square carrying the uniform 5x5 node grid.
Uncut patches use four biquadratic sub-quads, cut patches eight quadratic
sub-triangles; the physical patch is the isoparametric image of the
reference patch under the 25 node positions.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from .exceptions import NonPositiveJacobian
from .patch_mesh import (NODES_PER_PATCH, NODES_PER_SIDE, UNCUT_QUADS, CutKind, MeshModel, PatchRecord,
                         Shape)
from .shape_functions import shape

logger = logging.getLogger(__name__)

_J, _I = np.divmod(np.arange(NODES_PER_PATCH), NODES_PER_SIDE)
REFERENCE_NODES = np.column_stack([_I, _J]) / 4.0


class BasisKind(str, Enum):
    LAGRANGE = "lagrange"
    HIERARCHICAL = "hierarchical"


class ReferenceBasis:
    """
    The 25 nodal shape functions of the reference patch, either tensor
    biquadratic on four sub-quads (UncutQ2) or piecewise quadratic on eight
    sub-triangles (CutP2).
    """

    def __init__(self, kind: str, elements: Sequence[Tuple[int, ...]]):
        self.kind = kind
        self.elements = [tuple(int(n) for n in el) for el in elements]
        self._affine = [self._element_affine(el) for el in self.elements]

    @classmethod
    def uncut(cls):
        return cls("UncutQ2", UNCUT_QUADS)

    @classmethod
    def for_record(cls, record: PatchRecord):
        if record.config.kind == CutKind.UNCUT:
            return cls.uncut()
        return cls("CutP2", [el.node_ids for el in record.elements])

    def cell(self, sub_id):
        return "quad" if len(self.elements[sub_id]) == 9 else "triangle"

    @staticmethod
    def _element_affine(element):
        """Reference sub-element as x = origin + B xi"""
        if len(element) == 9:
            return REFERENCE_NODES[element[0]], 0.5 * np.eye(2)
        v0, v1, v2 = REFERENCE_NODES[list(element[:3])]
        return v0, np.column_stack([v1 - v0, v2 - v0])

    def to_local(self, sub_id, point):
        origin, B = self._affine[sub_id]
        return np.linalg.solve(B, np.asarray(point, dtype=float) - origin)

    def contains(self, sub_id, point, tol=1e-12):
        xi = self.to_local(sub_id, point)
        if self.cell(sub_id) == "quad":
            return bool(np.all(xi >= -tol) and np.all(xi <= 1.0 + tol))
        return bool(xi[0] >= -tol and xi[1] >= -tol and xi[0] + xi[1] <= 1.0 + tol)

    def locate(self, point):
        for sub_id in range(len(self.elements)):
            if self.contains(sub_id, point):
                return sub_id
        raise ValueError(f"point {point} is outside the reference patch")

    def eval(self, sub_id, point):
        """Values (25,) and reference gradients (25, 2); zero off the sub-element"""
        if __debug__ and not self.contains(sub_id, point, tol=1e-10):
            raise ValueError(f"point {point} is outside sub-element {sub_id}")
        origin, B = self._affine[sub_id]
        xi = np.linalg.solve(B, np.asarray(point, dtype=float) - origin)
        local_values, local_gradients = shape(self.cell(sub_id), xi[None, :])
        ids = list(self.elements[sub_id])
        values = np.zeros(NODES_PER_PATCH)
        gradients = np.zeros((NODES_PER_PATCH, 2))
        values[ids] = local_values[0]
        gradients[ids] = local_gradients[0] @ np.linalg.inv(B)
        return values, gradients

    def __repr__(self):
        return f"<ReferenceBasis(kind='{self.kind}', sub_elements={len(self.elements)})>"


def eval_reference_basis(basis: ReferenceBasis, sub_element_id: int, point):
    return basis.eval(sub_element_id, point)


class PatchMap:
    """Isoparametric map of the reference patch onto a physical patch"""

    def __init__(self, nodes, basis: ReferenceBasis):
        self.nodes = np.asarray(nodes, dtype=float)
        self.basis = basis

    @classmethod
    def for_record(cls, record: PatchRecord):
        return cls(record.nodes, ReferenceBasis.for_record(record))

    def apply(self, point, sub_id=None):
        return self.evaluate(point, sub_id)[0]

    def evaluate(self, point, sub_id=None):
        if sub_id is None:
            sub_id = self.basis.locate(point)
        values, gradients = self.basis.eval(sub_id, point)
        x = values @ self.nodes
        J = self.nodes.T @ gradients
        det = float(J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0])
        if det <= 0.0:
            raise NonPositiveJacobian(f"det J = {det:.3e} at reference point {tuple(point)}")
        return x, J, det


def patch_map_eval(patch_map: PatchMap, point, sub_id=None):
    return patch_map.evaluate(point, sub_id)


@dataclass
class DoFMap:
    """Lattice numbering: node (I, J) of the (4 n_x + 1) x (4 n_y + 1) grid has index I + n_I * J"""
    n_I: int
    n_J: int
    boundary_dofs: np.ndarray

    @property
    def total_dofs(self):
        return self.n_I * self.n_J

    @property
    def free_dofs(self):
        mask = np.ones(self.total_dofs, dtype=bool)
        mask[self.boundary_dofs] = False
        return np.flatnonzero(mask)

    def patch_dofs(self, pi, pj):
        j, i = np.divmod(np.arange(NODES_PER_PATCH), NODES_PER_SIDE)
        return (4 * pi + i) + self.n_I * (4 * pj + j)

    def lattice_index(self, dof):
        J, I = np.divmod(np.asarray(dof), self.n_I)
        return I, J


def build_dof_map(mesh: MeshModel) -> DoFMap:
    n_I, n_J = mesh.grid.lattice_shape
    J, I = np.divmod(np.arange(n_I * n_J), n_I)
    boundary = np.flatnonzero((I == 0) | (I == n_I - 1) | (J == 0) | (J == n_J - 1))
    return DoFMap(n_I, n_J, boundary)


@dataclass
class ElementBlock:
    """Sub-elements of one cell type with their global dofs and node positions"""
    cell: str
    dofs: np.ndarray  # (E, n)
    coords: np.ndarray  # (E, n, 2)
    side: np.ndarray  # (E,)
    curvature: np.ndarray  # (E,)

    def __len__(self):
        return len(self.dofs)

    def subset(self, mask):
        return ElementBlock(self.cell, self.dofs[mask], self.coords[mask], self.side[mask], self.curvature[mask])


def _uncut_quads(mesh: MeshModel, dofmap: DoFMap) -> ElementBlock:
    grid = mesh.grid
    mask = np.ones((grid.n_x, grid.n_y), dtype=bool)
    for i, j in mesh.records:
        mask[i, j] = False
    pi, pj = np.nonzero(mask)
    local_j, local_i = np.divmod(np.array(UNCUT_QUADS), NODES_PER_SIDE)  # (4, 9)
    I = 4 * pi[:, None, None] + local_i[None, :, :]
    J = 4 * pj[:, None, None] + local_j[None, :, :]
    dofs = (I + dofmap.n_I * J).reshape(-1, 9)
    coords = grid.lattice_point(I, J).reshape(-1, 9, 2)
    side = np.repeat(np.where(mesh.uncut_sign[pi, pj] < 0, 1, 2), 4)
    return ElementBlock("quad", dofs, coords, side, np.zeros(len(dofs), dtype=int))


def _cut_triangles(mesh: MeshModel, dofmap: DoFMap) -> ElementBlock:
    dofs, coords, side, curvature = [], [], [], []
    for record in mesh.cut_records():
        ids = dofmap.patch_dofs(*record.index)
        for el in record.elements:
            local = list(el.node_ids)
            dofs.append(ids[local])
            coords.append(record.nodes[local])
            side.append(el.side)
            curvature.append(int(el.curvature))
    if not dofs:
        return ElementBlock("triangle", np.zeros((0, 6), dtype=int), np.zeros((0, 6, 2)),
                            np.zeros(0, dtype=int), np.zeros(0, dtype=int))
    return ElementBlock("triangle", np.array(dofs), np.array(coords), np.array(side), np.array(curvature))


class FiniteElementSpace:
    """Global continuous space: DoF map, node table and assembly-ready element blocks"""

    def __init__(self, mesh: MeshModel, basis_kind: BasisKind = BasisKind.LAGRANGE):
        self.mesh = mesh
        self.basis_kind = BasisKind(basis_kind)
        self.dofmap = build_dof_map(mesh)
        self.node_coordinates = mesh.node_coordinates()
        self.quads = _uncut_quads(mesh, self.dofmap)
        self.triangles = _cut_triangles(mesh, self.dofmap)

    @property
    def total_dofs(self):
        return self.dofmap.total_dofs

    @property
    def blocks(self):
        return [block for block in (self.quads, self.triangles) if len(block)]

    def interpolate(self, fun):
        """Nodal interpolant of a vectorised function of points (n, 2)"""
        return np.asarray(fun(self.node_coordinates), dtype=float)

    def patch_map(self, pi, pj) -> PatchMap:
        return PatchMap.for_record(self.mesh.patch(pi, pj))

    def __repr__(self):
        return (f"<FiniteElementSpace(dofs={self.total_dofs}, quads={len(self.quads)}, "
                f"triangles={len(self.triangles)}, basis='{self.basis_kind.value}')>")


# --------------------------------------------------------------------------
# scaled hierarchical basis
# --------------------------------------------------------------------------

# biquadratic quad, index a + 3*b: midpoint node -> parent vertex nodes
_QUAD_PARENTS = {
    1: ((0, 2), 0.5),
    3: ((0, 6), 0.5),
    5: ((2, 8), 0.5),
    7: ((6, 8), 0.5),
    4: ((0, 2, 6, 8), 0.25),
}
_TRIANGLE_PARENTS = {
    3: ((0, 1), 0.5),
    4: ((1, 2), 0.5),
    5: ((2, 0), 0.5),
}


def hierarchical_parents(space: FiniteElementSpace):
    """
    Sparse N with N[m, p] the value of the lower-order vertex function of p at
    midpoint node m. Rows and columns of boundary dofs are empty.
    """
    rows, cols, vals = [], [], []
    for block, parents in ((space.quads, _QUAD_PARENTS), (space.triangles, _TRIANGLE_PARENTS)):
        if not len(block):
            continue
        for child, (vertex_slots, weight) in parents.items():
            for slot in vertex_slots:
                rows.append(block.dofs[:, child])
                cols.append(block.dofs[:, slot])
                vals.append(np.full(len(block), weight))
    n = space.total_dofs
    if not rows:
        return sp.csr_matrix((n, n))
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    # shared nodes appear once per adjacent element
    pairs, first = np.unique(np.column_stack([rows, cols]), axis=0, return_index=True)
    rows, cols, vals = pairs[:, 0], pairs[:, 1], vals[first]
    boundary = np.zeros(n, dtype=bool)
    boundary[space.dofmap.boundary_dofs] = True
    keep = ~boundary[rows] & ~boundary[cols]
    return sp.csr_matrix((vals[keep], (rows[keep], cols[keep])), shape=(n, n))


def hierarchical_transform(mesh: MeshModel, space: FiniteElementSpace, stiffness=None,
                             kind: Optional[BasisKind] = None):
    """
    Change of basis S with Lagrange coefficients u = S v. For the scaled
    hierarchical basis S = H diag(d), H = I + N, where every free hierarchical
    function is scaled to unit energy: d = 1 / sqrt(diag(H^T A H)).

    Args:
        kind: overrides the basis kind of the space
    """
    n = space.total_dofs
    kind = space.basis_kind if kind is None else BasisKind(kind)
    if kind == BasisKind.LAGRANGE:
        return sp.identity(n, format="csr")
    if stiffness is None:
        raise ValueError("the scaled hierarchical basis needs the stiffness matrix")
    H = (sp.identity(n, format="csr") + hierarchical_parents(space)).tocsr()
    energy = np.asarray(H.multiply(stiffness @ H).sum(axis=0)).ravel()
    d = np.ones(n)
    free = space.dofmap.free_dofs
    if np.any(energy[free] <= 0.0):
        raise ValueError("stiffness matrix is not positive on the free dofs")
    d[free] = 1.0 / np.sqrt(energy[free])
    logger.debug("hierarchical scaling: d in [%.3e, %.3e]", d[free].min() if len(free) else 1.0,
                 d[free].max() if len(free) else 1.0)
    return (H @ sp.diags(d)).tocsr()


def invert_transform(S):
    """S^{-1} = diag(1/d) (I - N) for S = (I + N) diag(d) with N^2 = 0"""
    S = sp.csr_matrix(S)
    d = S.diagonal()
    n = S.shape[0]
    N = (S @ sp.diags(1.0 / d) - sp.identity(n)).tocsr()
    return (sp.diags(1.0 / d) @ (sp.identity(n) - N)).tocsr()
