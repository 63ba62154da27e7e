"""
Locally modified second-order finite elements for elliptic interface problems
"""
from .exceptions import (LmfemError, AssumptionViolation, DegenerateGeometry, NonPositiveJacobian,
                         MaxIterationsExceeded)
from .level_set import (LevelSetField, AffineLevelSet, CircleLevelSet, ParabolaLevelSet, ConstantLevelSet,
                        CallableLevelSet, LineCut, find_edge_cut, project_along_direction)
from .patch_mesh import (PatchGrid, MeshParameters, MeshModel, CutKind, CutConfig, Curvature, Shape,
                         SubElement, PatchNodeLayout, PatchRecord, classify_patch, build_node_layout,
                         apply_quadratic_rearrangement, check_max_angle, build_mesh)
from .fe_space import (BasisKind, ReferenceBasis, PatchMap, DoFMap, FiniteElementSpace,
                       eval_reference_basis, patch_map_eval, build_dof_map, hierarchical_transform,
                       invert_transform)
from .assembly import (ProblemSpec, LinearSystem, assemble_stiffness, assemble_load, assemble_system,
                       apply_dirichlet)
from .solver import CGResult, ConditionEstimate, cg_solve, estimate_condition
from .error_analysis import ErrorReport, l2_error, modified_energy_error, compute_eoc, attach_eoc

__all__ = [
    'LmfemError',
    'AssumptionViolation',
    'DegenerateGeometry',
    'NonPositiveJacobian',
    'MaxIterationsExceeded',
    'LevelSetField',
    'AffineLevelSet',
    'CircleLevelSet',
    'ParabolaLevelSet',
    'ConstantLevelSet',
    'CallableLevelSet',
    'LineCut',
    'find_edge_cut',
    'project_along_direction',
    'PatchGrid',
    'MeshParameters',
    'MeshModel',
    'CutKind',
    'CutConfig',
    'Curvature',
    'Shape',
    'SubElement',
    'PatchNodeLayout',
    'PatchRecord',
    'classify_patch',
    'build_node_layout',
    'apply_quadratic_rearrangement',
    'check_max_angle',
    'build_mesh',
    'BasisKind',
    'ReferenceBasis',
    'PatchMap',
    'DoFMap',
    'FiniteElementSpace',
    'eval_reference_basis',
    'patch_map_eval',
    'build_dof_map',
    'hierarchical_transform',
    'invert_transform',
    'ProblemSpec',
    'LinearSystem',
    'assemble_stiffness',
    'assemble_load',
    'assemble_system',
    'apply_dirichlet',
    'CGResult',
    'ConditionEstimate',
    'cg_solve',
    'estimate_condition',
    'ErrorReport',
    'l2_error',
    'modified_energy_error',
    'compute_eoc',
    'attach_eoc',
]
