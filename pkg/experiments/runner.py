"""
Experiment runner: one solve per (h, delta), convergence tables, delta sweeps
and condition-number studies
"""
import logging
import os
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import scipy.sparse as sp

import config
from fem import (AssumptionViolation, BasisKind, ErrorReport, FiniteElementSpace, LinearSystem,
                 MaxIterationsExceeded, MeshModel, PatchGrid, apply_dirichlet, assemble_system, attach_eoc,
                 build_mesh, cg_solve, estimate_condition, hierarchical_transform, l2_error,
                 modified_energy_error)
from utils.csv_export import write_reports_csv
from utils.matrix_market import export_matrix
from utils.vtk_export import export_vtk
from .examples import EXAMPLES, ExampleDefinition, build_example

logger = logging.getLogger(__name__)


@dataclass
class ExperimentConfig:
    example: str = "parabola"
    h_list: List[float] = field(default_factory=lambda: [1.0 / 32])
    delta: float = 0.0
    basis: str = config.BASIS_LAGRANGE
    tol: float = config.CG_TOL
    write_csv: bool = True
    write_vtk: bool = False
    write_matrix: bool = False
    sweep: Optional[Tuple[float, float, int]] = None  # (delta_start, delta_end, steps)
    condition: bool = False
    shift_unit: Optional[float] = None  # None shifts by delta * h
    out_dir: str = config.OUTPUT_DIR
    refined_quadrature: bool = False

    def validate(self):
        """Collect every problem and raise one ValueError"""
        errors = []
        if self.example not in EXAMPLES:
            errors.append(f"example must be one of {sorted(EXAMPLES)}")
        if not self.h_list:
            errors.append("at least one mesh size is needed")
        elif any(h <= 0 for h in self.h_list):
            errors.append("mesh sizes must be positive")
        if not 0.0 <= self.delta <= 1.0:
            errors.append("delta must lie in [0, 1]")
        if self.basis not in (config.BASIS_LAGRANGE, config.BASIS_HIERARCHICAL):
            errors.append(f"basis must be '{config.BASIS_LAGRANGE}' or '{config.BASIS_HIERARCHICAL}'")
        if self.tol <= 0:
            errors.append("solver tolerance must be positive")
        if self.sweep is not None:
            start, end, steps = self.sweep
            if not (0.0 <= start <= 1.0 and 0.0 <= end <= 1.0):
                errors.append("sweep bounds must lie in [0, 1]")
            if steps < 1:
                errors.append("sweep needs at least one step")
        if self.shift_unit is not None and self.shift_unit <= 0:
            errors.append("shift unit must be positive")
        if errors:
            raise ValueError("Experiment configuration errors:\n" + "\n".join(f"- {e}" for e in errors))
        return self

    def deltas(self):
        if self.sweep is None:
            return [self.delta]
        start, end, steps = self.sweep
        return np.linspace(start, end, int(steps)).tolist()

    def shift(self, h, delta):
        return delta * (h if self.shift_unit is None else self.shift_unit)


@dataclass
class RunResult:
    example: ExampleDefinition
    mesh: MeshModel
    space: FiniteElementSpace
    system: LinearSystem
    solution: np.ndarray
    report: ErrorReport

    def __repr__(self):
        return f"<RunResult(example='{self.example.name}', report={self.report})>"


def make_grid(h: float) -> PatchGrid:
    """Patch grid of the example domain with patch size PATCH_SIZE_FACTOR * h"""
    return PatchGrid.covering(config.DOMAIN_ORIGIN, config.DOMAIN_WIDTH, config.PATCH_SIZE_FACTOR * h)


def _safe_condition(matrix, free_dofs, label):
    try:
        return estimate_condition(matrix, free_dofs).cond
    except MaxIterationsExceeded as e:
        logger.warning("%s condition number unavailable: %s (residual %.3e)", label, e, e.residual)
        return None


def condition_numbers(mesh: MeshModel, space: FiniteElementSpace, system: LinearSystem):
    """Condition numbers of the free block in the Lagrange and scaled hierarchical basis"""
    free = system.free_dofs
    cond_lagrange = _safe_condition(system.matrix, free, "Lagrange")
    S = hierarchical_transform(mesh, space, system.matrix, kind=BasisKind.HIERARCHICAL)
    cond_hier = _safe_condition(sp.csr_matrix(S.T @ system.matrix @ S), free, "hierarchical")
    return cond_lagrange, cond_hier


def _output_stem(cfg: ExperimentConfig, h, delta):
    return os.path.join(cfg.out_dir, f"{cfg.example}_h{1.0 / h:g}_d{delta:g}")


def solve_example(cfg: ExperimentConfig, h: float, delta: float, condition: Optional[bool] = None) -> RunResult:
    """
    Build the mesh and space for one (h, delta), solve and evaluate the errors.

    Raises:
        AssumptionViolation: the interface is not resolved at this mesh size
        MaxIterationsExceeded: CG failed within its iteration budget
    """
    condition = cfg.condition if condition is None else condition
    example = build_example(cfg.example, cfg.shift(h, delta))
    spec = example.problem
    try:
        mesh = build_mesh(make_grid(h), example.level_set)
    except AssumptionViolation as e:
        logger.error("h=%g, delta=%g: %s", h, delta, e)
        raise

    space = FiniteElementSpace(mesh, cfg.basis)
    system = apply_dirichlet(assemble_system(mesh, space, spec), spec.g, space)
    transform = None
    if space.basis_kind == BasisKind.HIERARCHICAL:
        transform = hierarchical_transform(mesh, space, system.matrix)
    result = cg_solve(system, tol=cfg.tol, transform=transform)

    report = ErrorReport(
        h=h,
        delta=delta,
        l2_error=l2_error(mesh, space, result.solution, spec, refined=cfg.refined_quadrature),
        energy_error=modified_energy_error(mesh, space, result.solution, spec, refined=cfg.refined_quadrature),
        PN=mesh.PN,
        n_l=mesh.n_l,
        n_fallback_patches=mesh.n_fallback_patches,
        cg_iters=result.iterations,
    )
    if condition:
        report.cond_lagrange, report.cond_hier = condition_numbers(mesh, space, system)
    logger.info("h=%g delta=%g: L2 %.4e, energy %.4e, PN=%d, n_l=%d, CG %d",
                h, delta, report.l2_error, report.energy_error, report.PN, report.n_l, report.cg_iters)

    if cfg.write_vtk or cfg.write_matrix:
        os.makedirs(cfg.out_dir, exist_ok=True)
    if cfg.write_vtk:
        export_vtk(mesh, space, result.solution, _output_stem(cfg, h, delta) + ".vtk")
    if cfg.write_matrix:
        export_matrix(system.matrix, _output_stem(cfg, h, delta) + ".mtx")
    return RunResult(example, mesh, space, system, result.solution, report)


def csv_path(cfg: ExperimentConfig, command: str):
    return os.path.join(cfg.out_dir, f"{command}_{cfg.example}.csv")


def _finish(cfg: ExperimentConfig, reports, command):
    if cfg.write_csv:
        path = csv_path(cfg, command)
        write_reports_csv(reports, path)
        logger.info("wrote %d rows to %s", len(reports), path)
    return reports


def _with_eoc_per_delta(reports):
    by_delta = {}
    for report in reports:
        by_delta.setdefault(report.delta, []).append(report)
    for rows in by_delta.values():
        attach_eoc(sorted(rows, key=lambda r: -r.h))
    return reports


def run_example(cfg: ExperimentConfig, command: str = "convergence") -> List[ErrorReport]:
    """One row per h at the configured delta, with EOCs between halving mesh sizes"""
    cfg.validate()
    h_list = list(cfg.h_list)
    if any(not np.isclose(a, 2.0 * b) for a, b in zip(h_list[:-1], h_list[1:])):
        logger.warning("mesh sizes %s do not halve successively, some EOCs stay empty", h_list)
    reports = [solve_example(cfg, h, cfg.delta).report for h in h_list]
    attach_eoc(reports)
    return _finish(cfg, reports, command)


def sweep_delta(cfg: ExperimentConfig, command: str = "sweep") -> List[ErrorReport]:
    """One run per delta step at each h; EOCs are taken between mesh sizes at equal delta"""
    cfg.validate()
    if cfg.sweep is None:
        raise ValueError("a delta sweep needs a delta range")
    reports = [solve_example(cfg, h, delta).report for h in cfg.h_list for delta in cfg.deltas()]
    _with_eoc_per_delta(reports)
    if reports:
        errors = [r.l2_error for r in reports]
        logger.info("L2 error over the sweep: min %.4e, max %.4e, ratio %.3f",
                    min(errors), max(errors), max(errors) / min(errors))
    return _finish(cfg, reports, command)


def condition_study(cfg: ExperimentConfig, command: str = "condition") -> List[ErrorReport]:
    """Condition numbers of both bases over the delta range at each h"""
    cfg.validate()
    reports = []
    for h in cfg.h_list:
        rows = [solve_example(cfg, h, delta, condition=True).report for delta in cfg.deltas()]
        _log_spike(h, rows)
        reports.extend(rows)
    return _finish(cfg, reports, command)


def _log_spike(h, rows):
    available = [r for r in rows if r.cond_lagrange is not None]
    if not available:
        logger.warning("h=%g: no condition estimate available", h)
        return
    worst = max(available, key=lambda r: r.cond_lagrange)
    median = float(np.median([r.cond_lagrange for r in available]))
    logger.info("h=%g: Lagrange condition peaks at delta=%g (%.3e, %.1fx the median), hierarchical %s",
                h, worst.delta, worst.cond_lagrange, worst.cond_lagrange / median,
                f"{worst.cond_hier:.3e}" if worst.cond_hier is not None else "unavailable")
