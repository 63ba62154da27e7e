import numpy as np
import pytest
import scipy.sparse.linalg as spla

from fem import (AffineLevelSet, CircleLevelSet, ConstantLevelSet, CutKind, FiniteElementSpace, MeshParameters,
                 PatchGrid, PatchMap, ProblemSpec, apply_dirichlet, assemble_load, assemble_stiffness,
                 assemble_system, build_mesh, cg_solve)
from fem.fe_space import REFERENCE_NODES
from fem.quadrature import quad_rule, triangle_rule


def _constant(value):
    return lambda x: np.full(np.shape(x)[:-1], float(value))


def _spec(ls, nu1=1.0, nu2=1.0, f1=0.0, f2=0.0, g=None):
    return ProblemSpec(nu1=nu1, nu2=nu2, f1=_constant(f1), f2=_constant(f2), g=g or _constant(0.0), level_set=ls)


def _oracle_stiffness(record):
    """Dense brute-force quadrature of one patch, one basis evaluation per point"""
    patch_map = PatchMap.for_record(record)
    basis = patch_map.basis
    A = np.zeros((25, 25))
    for sub_id, element in enumerate(basis.elements):
        if len(element) == 9:
            rule = quad_rule(5)
            origin, B = REFERENCE_NODES[element[0]], 0.5 * np.eye(2)
        else:
            rule = triangle_rule(8)
            v0, v1, v2 = REFERENCE_NODES[list(element[:3])]
            origin, B = v0, np.column_stack([v1 - v0, v2 - v0])
        for xi, w in zip(rule.points, rule.weights):
            point = origin + B @ xi
            _, J, det = patch_map.evaluate(point, sub_id)
            _, gradients = basis.eval(sub_id, point)
            physical = gradients @ np.linalg.inv(J)
            A += w * abs(np.linalg.det(B)) * det * physical @ physical.T
    return A


def test_stiffness_is_symmetric_with_zero_row_sums(line_mesh):
    space = FiniteElementSpace(line_mesh)
    A = assemble_stiffness(line_mesh, space, _spec(line_mesh.level_set, nu1=4.0, nu2=1.0))
    scale = abs(A).max()
    assert abs(A - A.T).max() <= 1e-13 * scale
    assert np.abs(np.asarray(A.sum(axis=1)).ravel()).max() <= 1e-11 * scale


def test_uncut_patch_matches_oracle():
    mesh = build_mesh(PatchGrid((0.0, 0.0), 0.5, 1), ConstantLevelSet(-1.0))
    space = FiniteElementSpace(mesh)
    A = assemble_stiffness(mesh, space, _spec(mesh.level_set)).toarray()
    oracle = _oracle_stiffness(mesh.patch(0, 0))
    np.testing.assert_allclose(A, oracle, atol=1e-12 * abs(oracle).max())


def test_cut_straight_patch_matches_oracle():
    ls = AffineLevelSet.through((0.15, 0.0), (0.5, 0.35), positive_side=(0.5, 0.0))
    mesh = build_mesh(PatchGrid((0.0, 0.0), 0.5, 1), ls, MeshParameters(quadratic=False))
    record = mesh.patch(0, 0)
    assert record.config.kind == CutKind.D
    space = FiniteElementSpace(mesh)
    A = assemble_stiffness(mesh, space, _spec(ls)).toarray()
    oracle = _oracle_stiffness(record)
    np.testing.assert_allclose(A, oracle, atol=1e-12 * abs(oracle).max())


def test_zero_source_gives_zero_load(line_mesh):
    space = FiniteElementSpace(line_mesh)
    assert np.all(assemble_load(line_mesh, space, _spec(line_mesh.level_set)) == 0.0)


def test_unit_source_integrates_domain_area(line_mesh):
    space = FiniteElementSpace(line_mesh)
    b = assemble_load(line_mesh, space, _spec(line_mesh.level_set, f1=1.0, f2=1.0))
    assert b.sum() == pytest.approx(1.0, abs=1e-12)


def test_one_sided_source_integrates_subdomain_area(line_mesh):
    # side 1 is below y = 0.61 - 0.3 x on the unit square
    space = FiniteElementSpace(line_mesh)
    b = assemble_load(line_mesh, space, _spec(line_mesh.level_set, f1=1.0, f2=0.0))
    assert b.sum() == pytest.approx(0.46, abs=1e-12)


def test_curved_subdomain_area_approximates_disk():
    grid = PatchGrid((-1.0, -1.0), 0.125, 16)
    ls = CircleLevelSet((0.03, -0.02), 0.55)
    mesh = build_mesh(grid, ls)
    space = FiniteElementSpace(mesh)
    b = assemble_load(mesh, space, _spec(ls, f1=1.0, f2=0.0))
    assert b.sum() == pytest.approx(np.pi * 0.55 ** 2, rel=1e-4)


def test_homogeneous_dirichlet_keeps_interior_rhs(line_mesh):
    space = FiniteElementSpace(line_mesh)
    system = assemble_system(line_mesh, space, _spec(line_mesh.level_set, f1=1.0, f2=2.0))
    constrained = apply_dirichlet(system, _constant(0.0), space)
    free = constrained.free_dofs
    np.testing.assert_array_equal(constrained.rhs[free], system.rhs[free])
    assert np.all(constrained.rhs[space.dofmap.boundary_dofs] == 0.0)
    assert abs(constrained.matrix - constrained.matrix.T).max() == 0.0


def test_constraining_every_dof_returns_the_data(line_mesh):
    space = FiniteElementSpace(line_mesh)
    system = assemble_system(line_mesh, space, _spec(line_mesh.level_set, f1=1.0))

    def g(x):
        return np.sin(x[..., 0]) + x[..., 1]

    constrained = apply_dirichlet(system, g, space, dofs=np.arange(space.total_dofs))
    solution = spla.spsolve(constrained.matrix.tocsc(), constrained.rhs)
    np.testing.assert_allclose(solution, g(space.node_coordinates), atol=1e-14)


def _configuration_meshes():
    grid = PatchGrid((0.0, 0.0), 0.25, 4)
    level_sets = [
        AffineLevelSet(-1.0, 1.0, 0.0),  # through opposite corners
        AffineLevelSet(-0.5, 1.0, -0.125),  # through a corner and an edge
        CircleLevelSet((0.5, 0.5), 0.4),  # opposite and adjacent edges
        AffineLevelSet(-1.0, 1.0, 0.075),  # adjacent edges, r = 0.3 and s = 0.7
    ]
    return [build_mesh(grid, ls) for ls in level_sets]


def test_linear_solutions_are_reproduced_on_all_configurations():
    kinds = set()

    def u(x):
        return 1.0 + 2.0 * x[..., 0] - 0.7 * x[..., 1]

    for mesh in _configuration_meshes():
        kinds |= {record.config.kind for record in mesh.records.values()}
        space = FiniteElementSpace(mesh)
        system = apply_dirichlet(assemble_system(mesh, space, _spec(mesh.level_set, 2.0, 2.0)), u, space)
        solution = spla.spsolve(system.matrix.tocsc(), system.rhs)
        np.testing.assert_allclose(solution, u(space.node_coordinates), atol=1e-9)
    assert kinds >= {CutKind.A, CutKind.B, CutKind.C, CutKind.D, CutKind.E}


def test_galerkin_residual_and_positivity(line_mesh, rng):
    space = FiniteElementSpace(line_mesh)
    spec = _spec(line_mesh.level_set, nu1=4.0, nu2=1.0, f1=1.0, f2=-2.0)
    system = apply_dirichlet(assemble_system(line_mesh, space, spec), _constant(0.5), space)
    result = cg_solve(system, tol=1e-12)
    residual = system.rhs - system.matrix @ result.solution
    free = system.free_dofs
    assert np.abs(residual[free]).max() <= 1e-12 * np.linalg.norm(system.rhs) * 10
    for _ in range(100):
        x = np.zeros(space.total_dofs)
        x[free] = rng.standard_normal(len(free))
        assert x @ (system.matrix @ x) > 0.0
