"""
Cartesian patch meshes locally adapted to a level-set interface

Each square patch carries a 5x5 grid of nodes. Local node (i, j) has id
i + 5*j; the patch corners are (0,0), (4,0), (4,4), (0,4). Patches that the
interface does not cross are split into four biquadratic quads, cut patches
into eight quadratic triangles whose vertices are moved onto the interface.

Cut patches are classified in a canonical frame. Canonical labels:

    x4 --- e3 --- x3
    |      |      |
    e4 --- xm --- e2
    |      |      |
    x1 --- e1 --- x2

A symmetry M of the square maps canonical grid positions c to actual grid
positions g = M (c - 2) + 2.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from enum import Enum, IntEnum
from typing import Dict, List, Optional, Tuple

import numpy as np

import config
from .exceptions import AssumptionViolation, DegenerateGeometry
from .level_set import (LevelSetField, LineCut, count_sign_changes, expected_sign_changes,
                        find_edge_cut, project_along_direction)
from .quadrature import CURVED_TRIANGLE_DEGREE, triangle_rule
from .shape_functions import determinant, jacobians, p2_shape, quadratic_curve

logger = logging.getLogger(__name__)

NODES_PER_SIDE = 5
NODES_PER_PATCH = 25


class CutKind(str, Enum):
    UNCUT = "Uncut"
    A = "A"
    B = "B"
    C = "C"
    D = "D"
    E = "E"


class Shape(str, Enum):
    QUAD = "quad"
    TRI = "triangle"


class Curvature(IntEnum):
    STRAIGHT = 0
    QUADRATIC = 1
    FALLBACK = 2


def local_id(i, j):
    return int(i) + NODES_PER_SIDE * int(j)


# Symmetries of the square acting on grid offsets from the patch center
SYMMETRIES: List[Tuple[str, np.ndarray]] = [
    ("identity", np.array([[1, 0], [0, 1]])),
    ("rot90", np.array([[0, -1], [1, 0]])),
    ("rot180", np.array([[-1, 0], [0, -1]])),
    ("rot270", np.array([[0, 1], [-1, 0]])),
    ("flip_x", np.array([[-1, 0], [0, 1]])),
    ("flip_y", np.array([[1, 0], [0, -1]])),
    ("transpose", np.array([[0, 1], [1, 0]])),
    ("anti_transpose", np.array([[0, -1], [-1, 0]])),
]

CANONICAL_GRID = {
    "x1": (0, 0), "x2": (4, 0), "x3": (4, 4), "x4": (0, 4),
    "e1": (2, 0), "e2": (4, 2), "e3": (2, 4), "e4": (0, 2),
    "xm": (2, 2),
}
CORNER_LABELS = ("x1", "x2", "x3", "x4")

# counter-clockwise in the canonical frame
CANONICAL_QUADS = (
    ("x1", "e1", "xm", "e4"),
    ("e1", "x2", "e2", "xm"),
    ("xm", "e2", "x3", "e3"),
    ("e4", "xm", "e3", "x4"),
)

INTERFACE_PATHS = {
    CutKind.A: ("x1", "xm", "x3"),
    CutKind.B: ("x1", "xm", "e2"),
    CutKind.C: ("e1", "xm", "e3"),
    CutKind.D: ("e1", "xm", "e2"),
    CutKind.E: ("e1", "e2"),
}

# quad index -> vertex the splitting diagonal starts from
FORCED_DIAGONALS = {
    CutKind.A: {0: 0, 2: 0},
    CutKind.B: {0: 0},
    CutKind.E: {1: 0},
}

# labels off the interface on the side of x2
X2_REGION = {
    CutKind.A: {"x2", "e1", "e2"},
    CutKind.B: {"x2", "e1"},
    CutKind.C: {"x2", "x3", "e2"},
    CutKind.D: {"x2"},
    CutKind.E: {"x2"},
}

# local corner grid positions counter-clockwise, and local edges as
# (start corner, end corner) in global orientation (left->right, bottom->top)
CORNER_GRID = ((0, 0), (4, 0), (4, 4), (0, 4))
EDGE_CORNERS = ((0, 1), (1, 2), (3, 2), (0, 3))
EDGE_MIDPOINT_GRID = ((2, 0), (4, 2), (2, 4), (0, 2))

# the four biquadratic sub-quads of an uncut patch, node order a + 3*b
UNCUT_QUADS = tuple(
    tuple(local_id(2 * qi + a, 2 * qj + b) for b in range(3) for a in range(3))
    for qj in range(2) for qi in range(2)
)


def _edge_grid(k):
    """Grid positions of the five nodes of local edge k in global orientation"""
    start, end = EDGE_CORNERS[k]
    a = np.array(CORNER_GRID[start])
    b = np.array(CORNER_GRID[end])
    return [tuple(a + (b - a) * t // 4) for t in range(5)]


def _edge_nodes(a, e, b):
    return np.array([a, 0.5 * (a + e), e, 0.5 * (e + b), b])


def _cross(u, v):
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


def _orient(a, b, p):
    """Twice the signed area of (a, b, p)"""
    return _cross(b - a, p - a)


def _line_intersection(p1, p2, p3, p4):
    d1, d2 = p2 - p1, p4 - p3
    denom = _cross(d1, d2)
    if abs(denom) <= 1e-14 * np.linalg.norm(d1) * np.linalg.norm(d2):
        raise DegenerateGeometry("parallel construction lines")
    t = _cross(p3 - p1, d2) / denom
    return p1 + t * d1


@dataclass(frozen=True)
class PatchGrid:
    """Square patches of size patch_size, n_x by n_y of them"""
    origin: Tuple[float, float]
    patch_size: float
    n_x: int
    n_y: Optional[int] = None

    def __post_init__(self):
        if self.n_y is None:
            object.__setattr__(self, "n_y", self.n_x)
        if self.patch_size <= 0:
            raise ValueError("patch_size must be positive")
        if self.n_x < 1 or self.n_y < 1:
            raise ValueError("the grid needs at least one patch per direction")
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))

    @classmethod
    def covering(cls, origin, width: float, patch_size: float):
        """Square grid covering [origin, origin + width]^2 exactly"""
        n = int(round(width / patch_size))
        if n < 1 or abs(n * patch_size - width) > 1e-12 * width:
            raise ValueError(f"patch size {patch_size} does not divide the domain width {width}")
        return cls(origin, patch_size, n)

    @property
    def n_patches_per_side(self):
        return self.n_x

    @property
    def node_spacing(self):
        return self.patch_size / 4.0

    @property
    def lattice_shape(self):
        return 4 * self.n_x + 1, 4 * self.n_y + 1

    @property
    def diameter(self):
        return self.patch_size * float(np.hypot(self.n_x, self.n_y))

    @property
    def far_corner(self):
        return self.lattice_point(4 * self.n_x, 4 * self.n_y)

    def lattice_point(self, I, J):
        I, J = np.broadcast_arrays(np.asarray(I, dtype=float), np.asarray(J, dtype=float))
        return np.stack([self.origin[0] + I * self.node_spacing,
                         self.origin[1] + J * self.node_spacing], axis=-1)

    def patch_lattice(self, pi, pj):
        """Lattice positions of the 25 nodes of patch (pi, pj)"""
        j, i = np.divmod(np.arange(NODES_PER_PATCH), NODES_PER_SIDE)
        return self.lattice_point(4 * pi + i, 4 * pj + j)

    def global_ids(self, pi, pj):
        j, i = np.divmod(np.arange(NODES_PER_PATCH), NODES_PER_SIDE)
        return (4 * pi + i) + self.lattice_shape[0] * (4 * pj + j)

    def corners(self, pi, pj):
        lattice = self.patch_lattice(pi, pj)
        return lattice[[local_id(*g) for g in CORNER_GRID]]


@dataclass
class MeshParameters:
    root_tol: Optional[float] = None  # absolute; defaults to ROOT_TOL * domain diameter
    vertex_tol: float = config.VERTEX_TOL  # relative to the patch diameter
    newton_max_iter: int = config.NEWTON_MAX_ITER
    edge_samples: int = config.EDGE_SAMPLES
    alpha_max: float = config.ALPHA_MAX
    eps_d: float = config.EPS_D
    corner_eta: float = config.CORNER_ETA
    corner_angle: float = config.CORNER_ANGLE
    curve_samples: int = config.CURVE_SAMPLES
    quadratic: bool = True


@dataclass
class PatchGeometry:
    """Input of the per-patch construction: corners, level-set values and edge cuts"""
    index: Tuple[int, int]
    size: float
    lattice: np.ndarray  # (25, 2) unmoved node positions
    corner_values: np.ndarray  # (4,)
    corner_signs: np.ndarray  # (4,) after vertex snapping
    edge_cuts: List[Optional[LineCut]]  # interior cuts per local edge, global orientation
    root_tol: float = config.ROOT_TOL
    newton_max_iter: int = config.NEWTON_MAX_ITER

    @property
    def corners(self):
        return self.lattice[[local_id(*g) for g in CORNER_GRID]]

    def edge_point(self, k):
        cut = self.edge_cuts[k]
        if cut is not None:
            return cut.point
        return self.lattice[local_id(*EDGE_MIDPOINT_GRID[k])]

    def edge_fraction(self, k):
        cut = self.edge_cuts[k]
        return 0.5 if cut is None else cut.r

    @classmethod
    def from_corners(cls, ls: LevelSetField, corners, index=(0, 0), tol=None, vertex_tol=None,
                     samples=None, max_iter=None):
        """Standalone patch given by its four counter-clockwise corners, x1 lower left"""
        corners = np.asarray(corners, dtype=float)
        size = float(corners[1, 0] - corners[0, 0])
        if size <= 0 or not np.allclose(corners[2] - corners[0], [size, size]):
            raise ValueError("corners must describe an axis-aligned square, counter-clockwise")
        if tol is None:
            tol = config.ROOT_TOL * np.sqrt(2.0) * size
        if vertex_tol is None:
            vertex_tol = config.VERTEX_TOL * np.sqrt(2.0) * size
        if max_iter is None:
            max_iter = config.NEWTON_MAX_ITER
        j, i = np.divmod(np.arange(NODES_PER_PATCH), NODES_PER_SIDE)
        lattice = corners[0] + np.column_stack([i, j]) * (size / 4.0)
        lattice[[local_id(*g) for g in CORNER_GRID]] = corners
        values = np.asarray(ls(corners), dtype=float)
        signs = _snap_signs(values, vertex_tol)
        cuts = []
        for start, end in EDGE_CORNERS:
            # every edge is scanned so that double crossings are rejected
            cut = find_edge_cut(ls, corners[start], corners[end], tol, vertex_tol, max_iter, samples)
            cuts.append(cut if signs[start] * signs[end] < 0 else None)
        return cls(tuple(index), size, lattice, values, signs, cuts, tol, max_iter)


@dataclass
class CutConfig:
    kind: CutKind
    symmetry: int = 0
    cut_edges: Tuple[int, ...] = ()
    cut_vertices: Tuple[int, ...] = ()
    r: Optional[float] = None
    s: Optional[float] = None
    x2_sign: int = 0  # level-set sign of the canonical x2 region
    uncut_sign: int = 0  # level-set sign of an uncut patch

    @property
    def symmetry_name(self):
        return SYMMETRIES[self.symmetry][0]

    @property
    def matrix(self):
        return SYMMETRIES[self.symmetry][1]

    def actual_grid(self, label):
        c = np.array(CANONICAL_GRID[label])
        g = self.matrix @ (c - 2) + 2
        return int(g[0]), int(g[1])

    def label_id(self, label):
        return local_id(*self.actual_grid(label))

    def __repr__(self):
        return (f"<CutConfig(kind={self.kind.value}, symmetry={self.symmetry_name}, "
                f"r={self.r}, s={self.s})>")


@dataclass
class SubElement:
    shape: Shape
    node_ids: Tuple[int, ...]
    side: int  # 1 or 2
    curvature: Curvature = Curvature.STRAIGHT
    interface_edge: Optional[int] = None  # local edge k = (v_k, v_{k+1}) lying on the interface

    def __repr__(self):
        return f"<SubElement({self.shape.value}, side={self.side}, curvature={self.curvature.name})>"


@dataclass
class PatchNodeLayout:
    nodes: np.ndarray  # (25, 2)
    moved: np.ndarray = field(default_factory=lambda: np.zeros(NODES_PER_PATCH, dtype=bool))


@dataclass
class PatchRecord:
    index: Tuple[int, int]
    config: CutConfig
    layout: PatchNodeLayout
    elements: List[SubElement]
    geometry: Optional[PatchGeometry] = None
    fallback: bool = False
    fallback_reason: Optional[str] = None

    @property
    def nodes(self):
        return self.layout.nodes

    def node(self, label):
        return self.layout.nodes[self.config.label_id(label)]

    @property
    def interface_segments(self):
        """(start id, midpoint id, end id) of every sub-edge on the discrete interface"""
        path = INTERFACE_PATHS.get(self.config.kind, ())
        segments = []
        for a, b in zip(path[:-1], path[1:]):
            ga = np.array(self.config.actual_grid(a))
            gb = np.array(self.config.actual_grid(b))
            segments.append((local_id(*ga), local_id(*((ga + gb) // 2)), local_id(*gb)))
        return segments

    @property
    def n_fallback_triangles(self):
        return sum(1 for el in self.elements if el.curvature == Curvature.FALLBACK)

    def __repr__(self):
        return f"<PatchRecord(index={self.index}, kind={self.config.kind.value}, fallback={self.fallback})>"


def _snap_signs(values, vertex_tol):
    values = np.asarray(values, dtype=float)
    return np.where(np.abs(values) <= vertex_tol, 0, np.sign(values)).astype(int)


# --------------------------------------------------------------------------
# classification
# --------------------------------------------------------------------------

def _matches(kind_family, s):
    s1, s2, s3, s4 = s
    if kind_family == CutKind.A:
        return s1 == 0 and s3 == 0 and s2 * s4 < 0
    if kind_family == CutKind.B:
        return s1 == 0 and s2 * s3 < 0 and s4 == s3
    if kind_family == CutKind.C:
        return 0 not in s and s1 * s2 < 0 and s4 * s3 < 0 and s1 == s4
    # adjacent edge cuts around x2
    return 0 not in s and s1 * s2 < 0 and s2 * s3 < 0 and s1 == s3 == s4


def _canonical_signs(signs, matrix):
    result = []
    for label in CORNER_LABELS:
        c = np.array(CANONICAL_GRID[label])
        g = tuple(matrix @ (c - 2) + 2)
        result.append(int(signs[CORNER_GRID.index(g)]))
    return result


def _family(signs):
    """Configuration family from snapped corner signs, or None for uncut"""
    s = [int(v) for v in signs]
    zeros = [k for k in range(4) if s[k] == 0]
    if len(zeros) == 0:
        cut = [k for k in range(4) if s[k] * s[(k + 1) % 4] < 0]
        if not cut:
            return None
        if len(cut) == 2:
            opposite = (cut[1] - cut[0]) == 2
            return CutKind.C if opposite else CutKind.D
        raise AssumptionViolation("the interface crosses all four patch edges")
    if len(zeros) == 1:
        z = zeros[0]
        others = {s[(z + 1) % 4], s[(z + 2) % 4], s[(z + 3) % 4]}
        if len(others) == 1:
            return None
        if s[(z + 1) % 4] != s[(z + 3) % 4]:
            return CutKind.B
        raise AssumptionViolation("the interface enters and leaves the patch through the same edge")
    if len(zeros) == 2:
        z0, z1 = zeros
        if z1 - z0 == 2:
            rest = [s[(z0 + 1) % 4], s[(z0 + 3) % 4]]
            return CutKind.A if rest[0] != rest[1] else None
        rest = [s[k] for k in range(4) if k not in zeros]
        if rest[0] == rest[1]:
            return None
        raise AssumptionViolation("the interface leaves a patch edge through both of its ends")
    raise AssumptionViolation("three or more patch corners lie on the interface")


def _classify_geometry(geometry: PatchGeometry) -> CutConfig:
    signs = geometry.corner_signs
    family = _family(signs)
    if family is None:
        return CutConfig(CutKind.UNCUT, uncut_sign=int(np.sign(np.sum(signs))))

    for index, (_, matrix) in enumerate(SYMMETRIES):
        canonical = _canonical_signs(signs, matrix)
        if _matches(family, canonical):
            break
    else:
        raise AssumptionViolation(f"no canonical orientation for corner signs {list(signs)}")

    cfg = CutConfig(family, symmetry=index, x2_sign=canonical[1])
    cfg.cut_vertices = tuple(k for k in range(4) if signs[k] == 0)
    cfg.cut_edges = tuple(k for k in range(4) if geometry.edge_cuts[k] is not None)

    def fraction(label_from, label_to, edge_label):
        """Relative position of an edge point measured from label_from"""
        g_edge = cfg.actual_grid(edge_label)
        k = EDGE_MIDPOINT_GRID.index(g_edge)
        start, _ = EDGE_CORNERS[k]
        r = geometry.edge_fraction(k)
        if CORNER_GRID[start] == cfg.actual_grid(label_from):
            return r
        return 1.0 - r

    if family == CutKind.B:
        cfg.s = fraction("x2", "x3", "e2")
    elif family == CutKind.C:
        cfg.r = fraction("x1", "x2", "e1")
        cfg.s = fraction("x4", "x3", "e3")
    elif family == CutKind.D:
        cfg.r = fraction("x1", "x2", "e1")
        cfg.s = fraction("x2", "x3", "e2")
        if not (cfg.r <= 0.5 and cfg.s >= 0.5):
            cfg.kind = CutKind.E
    return cfg


def classify_patch(ls: LevelSetField, corners, **kwargs) -> CutConfig:
    """
    Classify an axis-aligned square patch against the interface.

    Args:
        corners: the four corners counter-clockwise starting at the lower left
        kwargs: tol, vertex_tol, samples, max_iter forwarded to the edge root finder

    Raises:
        AssumptionViolation: an edge is cut twice or the cut pattern is not admissible
    """
    geometry = PatchGeometry.from_corners(ls, corners, **kwargs)
    return _classify_geometry(geometry)


# --------------------------------------------------------------------------
# straight-edge layout
# --------------------------------------------------------------------------

def _interior_angles(points, orientation):
    """Interior angles in degrees of a polygon, counter-clockwise when orientation > 0"""
    n = len(points)
    angles = np.empty(n)
    for k in range(n):
        u = points[(k + 1) % n] - points[k]
        v = points[k - 1] - points[k]
        angle = np.degrees(np.arctan2(orientation * _cross(u, v), np.dot(u, v)))
        angles[k] = angle % 360.0
    return angles


def _boundary_nodes(geometry: PatchGeometry, nodes):
    """Nodes on the patch edges, shared bit-for-bit with the neighbour patch"""
    for k in range(4):
        if geometry.edge_cuts[k] is None:
            continue
        grid = _edge_grid(k)
        a = geometry.lattice[local_id(*grid[0])]
        b = geometry.lattice[local_id(*grid[4])]
        for g, p in zip(grid, _edge_nodes(a, geometry.edge_cuts[k].point, b)):
            nodes[local_id(*g)] = p


_BOUNDARY_IDS = frozenset(local_id(*g) for k in range(4) for g in _edge_grid(k))


def _set_straight_midpoints(nodes, elements):
    for el in elements:
        ids = el.node_ids
        for k in range(3):
            m = ids[3 + k]
            if m in _BOUNDARY_IDS:
                continue
            nodes[m] = 0.5 * (nodes[ids[k]] + nodes[ids[(k + 1) % 3]])


def triangle_area(vertices):
    vertices = np.asarray(vertices, dtype=float)
    return 0.5 * float(_orient(vertices[0], vertices[1], vertices[2]))


def _midpoint_place(cfg: CutConfig, P):
    kind = cfg.kind
    if kind in (CutKind.A, CutKind.C, CutKind.E):
        return _line_intersection(P["e1"], P["e3"], P["e2"], P["e4"])
    if kind == CutKind.B:
        return _line_intersection(P["e1"], P["e3"], P["x1"], P["e2"])
    return 0.5 * (P["e1"] + P["e2"])


def build_node_layout(cfg: CutConfig, geometry: PatchGeometry, ls: Optional[LevelSetField] = None,
                      area_tol: float = 1e-13) -> PatchRecord:
    """
    Straight-edge stage: place e_i and x_m, split the four quads by their
    largest angle and assign every triangle to a subdomain.
    """
    nodes = geometry.lattice.copy()
    if cfg.kind == CutKind.UNCUT:
        side = 1 if cfg.uncut_sign < 0 else 2
        if cfg.uncut_sign == 0 and ls is not None:
            side = int(ls.side(geometry.lattice[local_id(2, 2)]))
        elements = [SubElement(Shape.QUAD, quad, side) for quad in UNCUT_QUADS]
        return PatchRecord(geometry.index, cfg, PatchNodeLayout(nodes), elements, geometry)

    _boundary_nodes(geometry, nodes)
    P = {label: nodes[cfg.label_id(label)].copy() for label in CANONICAL_GRID}
    xm = _midpoint_place(cfg, P)
    P["xm"] = xm
    nodes[cfg.label_id("xm")] = xm

    orientation = int(round(np.linalg.det(cfg.matrix)))
    path = INTERFACE_PATHS[cfg.kind]
    on_interface = set(path)
    path_edges = {frozenset(pair) for pair in zip(path[:-1], path[1:])}
    forced = FORCED_DIAGONALS.get(cfg.kind, {})
    x2_side = 1 if cfg.x2_sign < 0 else 2
    other_side = 3 - x2_side

    elements = []
    for q, quad in enumerate(CANONICAL_QUADS):
        if q in forced:
            k = forced[q]
        else:
            angles = _interior_angles(np.array([P[label] for label in quad]), orientation)
            k = int(np.argmax(angles))
        triangles = [(quad[k], quad[(k + 1) % 4], quad[(k + 2) % 4]),
                     (quad[k], quad[(k + 2) % 4], quad[(k + 3) % 4])]
        for tri in triangles:
            rest = [label for label in tri if label not in on_interface]
            if not rest:
                rest = [label for label in quad if label not in tri]
            side = x2_side if rest[0] in X2_REGION[cfg.kind] else other_side

            labels = list(tri)
            if orientation < 0:
                labels = [labels[0], labels[2], labels[1]]
            grids = [np.array(cfg.actual_grid(label)) for label in labels]
            vertex_ids = [local_id(*g) for g in grids]
            mid_ids = [local_id(*((grids[k2] + grids[(k2 + 1) % 3]) // 2)) for k2 in range(3)]
            interface_edge = None
            for k2 in range(3):
                if frozenset((labels[k2], labels[(k2 + 1) % 3])) in path_edges:
                    interface_edge = k2
            elements.append(SubElement(Shape.TRI, tuple(vertex_ids + mid_ids), side,
                                       interface_edge=interface_edge))

    _set_straight_midpoints(nodes, elements)

    for el in elements:
        area = triangle_area(nodes[list(el.node_ids[:3])])
        if area <= area_tol * geometry.size ** 2:
            raise DegenerateGeometry(
                f"sub-triangle of area {area:.3e} in a {cfg.kind.value} patch {geometry.index}")

    logger.debug("patch %s: %r", geometry.index, cfg)
    return PatchRecord(geometry.index, cfg, PatchNodeLayout(nodes), elements, geometry)


# --------------------------------------------------------------------------
# angles and the quadratic rearrangement
# --------------------------------------------------------------------------

def check_max_angle(nodes) -> float:
    """
    Largest interior angle in degrees of a triangle given by 3 vertices, or
    3 vertices followed by the midpoints m01, m12, m20 of its quadratic edges.
    Angles are taken between edge tangents at the vertices.
    """
    nodes = np.asarray(nodes, dtype=float)
    vertices = nodes[:3]
    if len(nodes) == 6:
        mids = nodes[3:]
    elif len(nodes) == 3:
        mids = 0.5 * (vertices + np.roll(vertices, -1, axis=0))
    else:
        raise ValueError("expected 3 or 6 nodes")

    def tangent(k, j, m):
        return -3.0 * vertices[k] + 4.0 * m - vertices[j]

    largest = 0.0
    for k in range(3):
        forward = tangent(k, (k + 1) % 3, mids[k])
        backward = tangent(k, (k - 1) % 3, mids[(k - 1) % 3])
        nf, nb = np.linalg.norm(forward), np.linalg.norm(backward)
        if nf == 0.0 or nb == 0.0:
            raise DegenerateGeometry("triangle edge of zero length")
        cosine = np.clip(np.dot(forward, backward) / (nf * nb), -1.0, 1.0)
        largest = max(largest, float(np.degrees(np.arccos(cosine))))
    return largest


def _unit_normal(p, q):
    d = q - p
    n = np.array([-d[1], d[0]])
    return n / np.linalg.norm(n)


def _curved_edge_crosses(a, m, b, c, samples):
    """
    True when the quadratic edge a-m-b leaves the wedge of triangle (a, b, c),
    i.e. cuts one of the straight edges a-c or b-c.
    """
    t = np.arange(1, samples + 1) / (samples + 1.0)
    points = quadratic_curve(a, m, b, t)
    c_side = np.sign(_orient(a, b, c))
    inside = np.sign(_orient(a, b, points)) == c_side
    if not np.any(inside):
        return False
    points = points[inside]
    ok_ac = np.sign(_orient(a, c, points)) == np.sign(_orient(a, c, b))
    ok_bc = np.sign(_orient(b, c, points)) == np.sign(_orient(b, c, a))
    return not bool(np.all(ok_ac & ok_bc))


def _positive_jacobian(coords):
    rule = triangle_rule(CURVED_TRIANGLE_DEGREE)
    points = np.vstack([rule.points, [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]])
    _, gradients = p2_shape(points)
    det = determinant(jacobians(coords[None, :, :], gradients))
    return bool(np.all(det > 0.0))


def _grazing_corner_cut(geometry: PatchGeometry, ls, corner_eta, corner_angle):
    """
    Reason string when an edge cut sits next to a patch corner while the
    interface runs almost along the other edge through that corner, else None.
    """
    corners = geometry.corners
    for k, cut in enumerate(geometry.edge_cuts):
        if cut is None or corner_eta < cut.r < 1.0 - corner_eta:
            continue
        start, end = EDGE_CORNERS[k]
        edge = corners[end] - corners[start]
        gradient = np.asarray(ls.gradient(cut.point), dtype=float)
        norm = float(np.linalg.norm(gradient))
        if norm == 0.0:
            return f"vanishing level-set gradient at the cut on edge {k}"
        cosine = abs(float(np.dot(gradient, edge))) / (norm * float(np.linalg.norm(edge)))
        angle = float(np.degrees(np.arccos(np.clip(cosine, -1.0, 1.0))))
        if angle < corner_angle:
            return (f"interface grazes a corner: cut at r={cut.r:.2e} on edge {k}, "
                    f"{angle:.2f} degrees off the edge normal")
    return None


def _rearrange(record: PatchRecord, ls, alpha_max, eps_d, tol, curve_samples, max_iter):
    """Returns (nodes, moved) or (None, reason)"""
    cfg = record.config
    size = record.geometry.size
    nodes = record.layout.nodes.copy()
    moved = np.zeros(NODES_PER_PATCH, dtype=bool)
    P = {label: nodes[cfg.label_id(label)].copy() for label in CANONICAL_GRID}
    xm_id = cfg.label_id("xm")

    # first step: the patch midpoint
    kind = cfg.kind
    if kind in (CutKind.A, CutKind.D):
        a, b = (P["x1"], P["x3"]) if kind == CutKind.A else (P["e1"], P["e2"])
        target = project_along_direction(ls, P["xm"], _unit_normal(a, b), tol, 0.5 * size, max_iter)
        if target is None:
            return None, "midpoint projection failed"
    elif kind in (CutKind.B, CutKind.C):
        a, b = (P["e1"], P["e3"]) if kind == CutKind.B else (P["e4"], P["e2"])
        length = float(np.linalg.norm(b - a))
        target = project_along_direction(ls, P["xm"], (b - a) / length, tol, length, max_iter)
        if target is None:
            return None, "midpoint projection failed"
        if kind == CutKind.B:
            # relative length of e1 xm against the chord e1 e2
            d = float(np.linalg.norm(target - P["e1"]) / np.linalg.norm(P["e2"] - P["e1"]))
        else:
            d = float(np.dot(target - a, b - a)) / length ** 2
        if not eps_d < d < 1.0 - eps_d:
            return None, f"midpoint relative position {d:.3f} outside ({eps_d}, {1 - eps_d})"
    else:
        target = P["xm"]
    if not np.array_equal(target, nodes[xm_id]):
        nodes[xm_id] = target
        moved[xm_id] = True

    _set_straight_midpoints(nodes, record.elements)
    for el in record.elements:
        corners = nodes[list(el.node_ids[:3])]
        if triangle_area(corners) <= 0.0:
            return None, "midpoint move inverted a triangle"
        if check_max_angle(corners) > alpha_max:
            return None, "midpoint move violates the maximum angle"

    # second step: midpoints of the interface sub-edges
    for start, mid, end in record.interface_segments:
        p, q = nodes[start], nodes[end]
        length = float(np.linalg.norm(q - p))
        target = project_along_direction(ls, nodes[mid], _unit_normal(p, q), tol, length, max_iter)
        if target is None:
            return None, "interface edge midpoint projection failed"
        if not np.array_equal(target, nodes[mid]):
            nodes[mid] = target
            moved[mid] = True

    for el in record.elements:
        if el.interface_edge is None:
            continue
        ids = el.node_ids
        k = el.interface_edge
        a, b, c = nodes[ids[k]], nodes[ids[(k + 1) % 3]], nodes[ids[(k + 2) % 3]]
        if _curved_edge_crosses(a, nodes[ids[3 + k]], b, c, curve_samples):
            return None, "curved edge cuts another edge"
        coords = nodes[list(ids)]
        if check_max_angle(coords) > alpha_max:
            return None, "curved triangle violates the maximum angle"
        if not _positive_jacobian(coords):
            return None, "curved triangle has a non-positive Jacobian"
    return (nodes, moved), None


def apply_quadratic_rearrangement(record: PatchRecord, ls: LevelSetField,
                                  alpha_max: Optional[float] = None, eps_d: Optional[float] = None,
                                  tol: Optional[float] = None, curve_samples: Optional[int] = None,
                                  max_iter: Optional[int] = None, corner_eta: Optional[float] = None,
                                  corner_angle: Optional[float] = None) -> PatchRecord:
    """
    Move the patch midpoint and the interface edge midpoints onto the
    interface. When any step fails the straight layout is kept and the
    triangles along the interface are flagged as linear fallback. Patches
    whose interface grazes a corner fall back before any node moves.
    """
    if record.config.kind == CutKind.UNCUT:
        raise ValueError("uncut patches carry no interface")
    alpha_max = config.ALPHA_MAX if alpha_max is None else alpha_max
    eps_d = config.EPS_D if eps_d is None else eps_d
    tol = record.geometry.root_tol if tol is None else tol
    curve_samples = config.CURVE_SAMPLES if curve_samples is None else curve_samples
    max_iter = record.geometry.newton_max_iter if max_iter is None else max_iter
    corner_eta = config.CORNER_ETA if corner_eta is None else corner_eta
    corner_angle = config.CORNER_ANGLE if corner_angle is None else corner_angle

    reason = _grazing_corner_cut(record.geometry, ls, corner_eta, corner_angle)
    if reason is None:
        result, reason = _rearrange(record, ls, alpha_max, eps_d, tol, curve_samples, max_iter)
    else:
        result = None
    if result is None:
        logger.warning("patch %s (%s): linear interface fallback, %s",
                       record.index, record.config.kind.value, reason)
        elements = [replace(el, curvature=Curvature.FALLBACK) if el.interface_edge is not None
                    else replace(el) for el in record.elements]
        return replace(record, elements=elements, fallback=True, fallback_reason=reason,
                       layout=PatchNodeLayout(record.layout.nodes.copy()))

    nodes, moved = result
    elements = [replace(el, curvature=Curvature.QUADRATIC) if el.interface_edge is not None
                else replace(el) for el in record.elements]
    return replace(record, elements=elements, layout=PatchNodeLayout(nodes, moved))


# --------------------------------------------------------------------------
# the global mesh
# --------------------------------------------------------------------------

class MeshModel:
    """
    Patch grid with the per-patch records of every cut patch. Uncut patches
    are described by the lattice alone and their side sign.
    """

    def __init__(self, grid: PatchGrid, level_set: LevelSetField, records: Dict[Tuple[int, int], PatchRecord],
                 uncut_sign: np.ndarray, edge_cuts: Dict[Tuple[str, int, int], LineCut],
                 params: MeshParameters):
        self.grid = grid
        self.level_set = level_set
        self.records = records
        self.uncut_sign = uncut_sign
        self.edge_cuts = edge_cuts
        self.params = params

    @property
    def PN(self):
        return len(self.records)

    @property
    def n_l(self):
        """Sub-triangles with a linear interface approximation"""
        return sum(record.n_fallback_triangles for record in self.records.values())

    @property
    def n_fallback_patches(self):
        return sum(1 for record in self.records.values() if record.fallback)

    @property
    def n_patches(self):
        return self.grid.n_x * self.grid.n_y

    def is_cut(self, i, j):
        return (i, j) in self.records

    def uncut_side(self, i, j):
        return 1 if self.uncut_sign[i, j] < 0 else 2

    def patch(self, i, j) -> PatchRecord:
        """Record of any patch; uncut records are produced on demand"""
        if (i, j) in self.records:
            return self.records[(i, j)]
        if not (0 <= i < self.grid.n_x and 0 <= j < self.grid.n_y):
            raise IndexError(f"patch ({i}, {j}) outside the grid")
        nodes = self.grid.patch_lattice(i, j)
        side = self.uncut_side(i, j)
        elements = [SubElement(Shape.QUAD, quad, side) for quad in UNCUT_QUADS]
        return PatchRecord((i, j), CutConfig(CutKind.UNCUT, uncut_sign=int(self.uncut_sign[i, j])),
                           PatchNodeLayout(nodes), elements)

    def cut_records(self):
        return [self.records[key] for key in sorted(self.records)]

    def node_coordinates(self):
        """Positions of all lattice nodes, with cut patches' nodes in their adapted place"""
        nx, ny = self.grid.lattice_shape
        J, I = np.divmod(np.arange(nx * ny), nx)
        coords = self.grid.lattice_point(I, J)
        for (i, j), record in self.records.items():
            coords[self.grid.global_ids(i, j)] = record.nodes
        return coords

    def counts(self):
        kinds = {kind.value: 0 for kind in CutKind if kind != CutKind.UNCUT}
        for record in self.records.values():
            kinds[record.config.kind.value] += 1
        return kinds

    def __repr__(self):
        return (f"<MeshModel(patches={self.grid.n_x}x{self.grid.n_y}, h_P={self.grid.patch_size}, "
                f"PN={self.PN}, n_l={self.n_l})>")


def _edge_prescan(ls, a, b, values_a, values_b, samples, vertex_tol):
    """Multiple-crossing flags for arrays of edges a -> b"""
    t = np.linspace(0.0, 1.0, samples + 1)
    points = a[..., None, :] + t[:, None] * (b - a)[..., None, :]
    values = np.asarray(ls(points), dtype=float)
    values[..., 0] = values_a
    values[..., -1] = values_b
    crossings = count_sign_changes(values, vertex_tol)
    return crossings > expected_sign_changes(values_a, values_b, vertex_tol)


def build_mesh(grid: PatchGrid, ls: LevelSetField, params: Optional[MeshParameters] = None) -> MeshModel:
    """
    Classify every patch, compute each global edge cut once and build the
    adapted layouts.

    Raises:
        AssumptionViolation: with the offending patch index
    """
    params = params or MeshParameters()
    root_tol = params.root_tol if params.root_tol is not None else config.ROOT_TOL * grid.diameter
    vertex_tol = params.vertex_tol * np.sqrt(2.0) * grid.patch_size
    nx, ny = grid.n_x, grid.n_y

    I = 4 * np.arange(nx + 1)
    J = 4 * np.arange(ny + 1)
    corners = grid.lattice_point(I[:, None], J[None, :])  # (nx+1, ny+1, 2)
    values = np.asarray(ls(corners), dtype=float)
    signs = _snap_signs(values, vertex_tol)

    # horizontal edges (i, j): corner (i, j) -> (i+1, j); vertical (i, j): (i, j) -> (i, j+1)
    bad_h = _edge_prescan(ls, corners[:-1, :], corners[1:, :], values[:-1, :], values[1:, :],
                          params.edge_samples, vertex_tol)
    bad_v = _edge_prescan(ls, corners[:, :-1], corners[:, 1:], values[:, :-1], values[:, 1:],
                          params.edge_samples, vertex_tol)
    for bad, orientation in ((bad_h, "h"), (bad_v, "v")):
        if np.any(bad):
            i, j = (int(v) for v in np.argwhere(bad)[0])
            patch = (min(i, nx - 1), min(j, ny - 1))
            raise AssumptionViolation("a patch edge is crossed more than once by the interface", patch)

    edge_cuts: Dict[Tuple[str, int, int], LineCut] = {}
    cut_h = signs[:-1, :] * signs[1:, :] < 0
    cut_v = signs[:, :-1] * signs[:, 1:] < 0
    for i, j in np.argwhere(cut_h).tolist():
        try:
            edge_cuts[("h", i, j)] = find_edge_cut(ls, corners[i, j], corners[i + 1, j], root_tol, vertex_tol,
                                                   params.newton_max_iter, params.edge_samples)
        except AssumptionViolation as e:
            raise AssumptionViolation(str(e), (min(i, nx - 1), min(j, ny - 1))) from e
    for i, j in np.argwhere(cut_v).tolist():
        try:
            edge_cuts[("v", i, j)] = find_edge_cut(ls, corners[i, j], corners[i, j + 1], root_tol, vertex_tol,
                                                   params.newton_max_iter, params.edge_samples)
        except AssumptionViolation as e:
            raise AssumptionViolation(str(e), (min(i, nx - 1), min(j, ny - 1))) from e

    patch_signs = np.stack([signs[:-1, :-1], signs[1:, :-1], signs[1:, 1:], signs[:-1, 1:]], axis=-1)
    uncut_sign = np.sign(patch_signs.sum(axis=-1)).astype(int)
    candidates = np.any(patch_signs == 0, axis=-1) | (
        (patch_signs.max(axis=-1) > 0) & (patch_signs.min(axis=-1) < 0))

    records: Dict[Tuple[int, int], PatchRecord] = {}
    for i, j in np.argwhere(candidates):
        i, j = int(i), int(j)
        geometry = PatchGeometry(
            index=(i, j),
            size=grid.patch_size,
            lattice=grid.patch_lattice(i, j),
            corner_values=np.array([values[i, j], values[i + 1, j], values[i + 1, j + 1], values[i, j + 1]]),
            corner_signs=patch_signs[i, j],
            edge_cuts=[edge_cuts.get(("h", i, j)), edge_cuts.get(("v", i + 1, j)),
                       edge_cuts.get(("h", i, j + 1)), edge_cuts.get(("v", i, j))],
            root_tol=root_tol,
            newton_max_iter=params.newton_max_iter,
        )
        try:
            cfg = _classify_geometry(geometry)
            if cfg.kind == CutKind.UNCUT:
                uncut_sign[i, j] = cfg.uncut_sign
                continue
            record = build_node_layout(cfg, geometry, ls)
            if params.quadratic:
                record = apply_quadratic_rearrangement(record, ls, params.alpha_max, params.eps_d,
                                                       root_tol, params.curve_samples,
                                                       params.newton_max_iter, params.corner_eta,
                                                       params.corner_angle)
        except AssumptionViolation as e:
            if e.patch is not None:
                raise
            raise AssumptionViolation(str(e), (i, j)) from e
        records[(i, j)] = record

    mesh = MeshModel(grid, ls, records, uncut_sign, edge_cuts, params)
    logger.info("mesh %dx%d, h_P=%g: PN=%d, n_l=%d (%d fallback patches), kinds %s",
                nx, ny, grid.patch_size, mesh.PN, mesh.n_l, mesh.n_fallback_patches, mesh.counts())
    return mesh
