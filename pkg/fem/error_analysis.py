"""
L2 and modified energy errors against the exact solution, and convergence orders
"""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass
from typing import Iterator, Optional, Tuple

import numpy as np

from .assembly import ProblemSpec, chunks, element_geometry
from .fe_space import ElementBlock, FiniteElementSpace
from .patch_mesh import MeshModel
from .quadrature import (ERROR_QUAD_POINTS, ERROR_TRIANGLE_DEGREE, QuadratureRule, quad_rule, refine_rule,
                         triangle_rule)

logger = logging.getLogger(__name__)


@dataclass
class ErrorReport:
    h: float
    l2_error: Optional[float]
    energy_error: Optional[float]
    delta: float = 0.0
    eoc_l2: Optional[float] = None
    eoc_energy: Optional[float] = None
    PN: int = 0
    n_l: int = 0
    n_fallback_patches: int = 0
    cond_lagrange: Optional[float] = None
    cond_hier: Optional[float] = None
    cg_iters: Optional[int] = None

    def as_row(self):
        return asdict(self)

    def __repr__(self):
        return (f"<ErrorReport(h={self.h:g}, delta={self.delta:g}, l2={self.l2_error}, "
                f"energy={self.energy_error}, PN={self.PN}, n_l={self.n_l})>")


def _error_groups(space: FiniteElementSpace, refined: bool) -> Iterator[Tuple[ElementBlock, QuadratureRule]]:
    rules = {"quad": quad_rule(ERROR_QUAD_POINTS), "triangle": triangle_rule(ERROR_TRIANGLE_DEGREE)}
    for block in space.blocks:
        rule = rules[block.cell]
        yield block, refine_rule(rule) if refined else rule


def l2_error(mesh: MeshModel, space: FiniteElementSpace, coefficients, spec: ProblemSpec,
             refined: bool = False) -> float:
    """
    ||u - u_h|| with the exact branch chosen by the sign of the continuous
    level set at every quadrature point.
    """
    coefficients = np.asarray(coefficients, dtype=float)
    total = 0.0
    for block, rule in _error_groups(space, refined):
        for part in chunks(len(block)):
            geo = element_geometry(block.coords[part], block.cell, rule)
            u_h = np.einsum("qn,en->eq", geo.values, coefficients[block.dofs[part]])
            side = spec.level_set.side(geo.points)
            diff = spec.exact(side, geo.points) - u_h
            total += float(np.einsum("q,eq,eq->", rule.weights, geo.det, diff * diff))
    return float(np.sqrt(total))


def modified_energy_error(mesh: MeshModel, space: FiniteElementSpace, coefficients, spec: ProblemSpec,
                          refined: bool = False) -> float:
    """
    ||nu_h^{1/2} grad(u~ - u_h)|| where u~ is the exact branch of the discrete
    subdomain each sub-element belongs to.
    """
    coefficients = np.asarray(coefficients, dtype=float)
    total = 0.0
    for block, rule in _error_groups(space, refined):
        for part in chunks(len(block)):
            geo = element_geometry(block.coords[part], block.cell, rule)
            grad_u_h = np.einsum("eqna,en->eqa", geo.gradients, coefficients[block.dofs[part]])
            side = np.broadcast_to(block.side[part][:, None], geo.det.shape)
            diff = spec.exact_gradient(side, geo.points) - grad_u_h
            weight = rule.weights[None, :] * geo.det * spec.nu(side)
            total += float(np.sum(weight * np.sum(diff * diff, axis=-1)))
    return float(np.sqrt(total))


def compute_eoc(e_coarse: float, e_fine: float) -> float:
    """log2 of the error ratio of two meshes whose sizes differ by a factor two"""
    if e_coarse <= 0 or e_fine <= 0:
        raise ValueError("errors must be positive to compute a convergence order")
    return float(np.log2(e_coarse / e_fine))


def attach_eoc(reports):
    """Fill eoc fields of consecutive rows whose mesh sizes halve"""
    for coarse, fine in zip(reports[:-1], reports[1:]):
        if not np.isclose(coarse.h, 2.0 * fine.h, rtol=1e-12):
            continue
        if coarse.l2_error and fine.l2_error:
            fine.eoc_l2 = compute_eoc(coarse.l2_error, fine.l2_error)
        if coarse.energy_error and fine.energy_error:
            fine.eoc_energy = compute_eoc(coarse.energy_error, fine.energy_error)
    return reports
