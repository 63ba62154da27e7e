import itertools

import numpy as np
import pytest

from fem import (AffineLevelSet, BasisKind, CircleLevelSet, ConstantLevelSet, FiniteElementSpace, PatchGrid,
                 PatchMap, ProblemSpec, ReferenceBasis, apply_quadratic_rearrangement, assemble_stiffness,
                 build_dof_map, build_mesh, build_node_layout, classify_patch, eval_reference_basis,
                 hierarchical_transform, invert_transform, patch_map_eval)
from fem.assembly import element_geometry
from fem.fe_space import REFERENCE_NODES
from fem.patch_mesh import PatchGeometry
from fem.quadrature import quad_rule, triangle_rule

UNIT = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


def _cut_record(p=(0.3, 0.0), q=(1.0, 0.7), curved=False):
    if curved:
        ls = CircleLevelSet((1.1, -0.1), 0.75)
    else:
        ls = AffineLevelSet.through(p, q, positive_side=(1.0, 0.0))
    geometry = PatchGeometry.from_corners(ls, UNIT)
    record = build_node_layout(classify_patch(ls, UNIT), geometry, ls)
    return apply_quadratic_rearrangement(record, ls)


def _bases():
    return [ReferenceBasis.uncut(), ReferenceBasis.for_record(_cut_record())]


def _unit_spec(ls):
    return ProblemSpec(nu1=1.0, nu2=1.0, f1=lambda x: np.zeros(x.shape[:-1]), f2=lambda x: np.zeros(x.shape[:-1]),
                       g=lambda x: np.zeros(x.shape[:-1]), level_set=ls)


def test_partition_of_unity():
    point = np.array([0.37, 0.81])
    for basis in _bases():
        values, gradients = eval_reference_basis(basis, basis.locate(point), point)
        assert values.sum() == pytest.approx(1.0, abs=1e-14)
        np.testing.assert_allclose(gradients.sum(axis=0), 0.0, atol=1e-12)


def test_nodal_property():
    for basis in _bases():
        table = np.array([basis.eval(basis.locate(p), p)[0] for p in REFERENCE_NODES])
        np.testing.assert_allclose(table, np.eye(25), atol=1e-14)


def test_center_function_of_uncut_patch():
    values, _ = ReferenceBasis.uncut().eval(0, np.array([0.125, 0.125]))
    assert values[12] == pytest.approx(0.015625, abs=1e-15)


def test_functions_vanish_off_their_sub_element():
    basis = ReferenceBasis.uncut()
    values, _ = basis.eval(0, np.array([0.2, 0.3]))
    outside = set(range(25)) - set(basis.elements[0])
    assert np.all(values[list(outside)] == 0.0)


def test_reference_gradients_match_finite_differences():
    eps = 1e-6
    for basis in _bases():
        for sub_id in range(len(basis.elements)):
            ids = basis.elements[sub_id]
            center = REFERENCE_NODES[list(ids[:3] if len(ids) == 6 else [ids[0], ids[8]])].mean(axis=0)
            _, gradients = basis.eval(sub_id, center)
            for axis in range(2):
                step = np.zeros(2)
                step[axis] = eps
                plus, _ = basis.eval(sub_id, center + step)
                minus, _ = basis.eval(sub_id, center - step)
                np.testing.assert_allclose((plus - minus) / (2 * eps), gradients[:, axis], atol=1e-6)


def test_point_outside_sub_element_is_rejected():
    basis = ReferenceBasis.uncut()
    if not __debug__:
        pytest.skip("contract checks are disabled")
    with pytest.raises(ValueError):
        basis.eval(0, np.array([0.9, 0.9]))


def test_unmoved_patch_map_is_affine():
    mesh = build_mesh(PatchGrid((1.0, 2.0), 0.5, 2), ConstantLevelSet(1.0))
    patch_map = PatchMap.for_record(mesh.patch(1, 0))
    for point in ([0.1, 0.2], [0.6, 0.7], [0.5, 0.5]):
        x, J, det = patch_map_eval(patch_map, np.array(point))
        np.testing.assert_allclose(J, 0.5 * np.eye(2), atol=1e-14)
        np.testing.assert_allclose(x, [1.5 + 0.5 * point[0], 2.0 + 0.5 * point[1]], atol=1e-14)
        assert det == pytest.approx(0.25)


def test_patch_map_interpolates_moved_nodes():
    record = _cut_record()
    patch_map = PatchMap.for_record(record)
    for label in ("e1", "e2", "xm"):
        node = record.config.label_id(label)
        np.testing.assert_allclose(patch_map.apply(REFERENCE_NODES[node]), record.nodes[node], atol=1e-14)


def test_jacobian_positive_across_layouts():
    rule = triangle_rule(5)
    positions = [1e-3, 0.1, 0.3, 0.5, 0.7, 0.9, 1 - 1e-3]
    for r, s in itertools.product(positions, repeat=2):
        for record in (_cut_record((r, 0.0), (1.0, s)), _cut_record((r, 0.0), (s, 1.0))):
            for el in record.elements:
                geo = element_geometry(record.nodes[list(el.node_ids)][None], "triangle", rule)
                assert np.all(geo.det > 0.0)


def test_curved_layout_has_positive_jacobian():
    record = _cut_record(curved=True)
    rule = triangle_rule(5)
    for el in record.elements:
        geo = element_geometry(record.nodes[list(el.node_ids)][None], "triangle", rule)
        assert np.all(geo.det > 0.0)


def test_dof_counts():
    assert build_dof_map(build_mesh(PatchGrid((0, 0), 1.0, 1), ConstantLevelSet())).total_dofs == 25
    assert build_dof_map(build_mesh(PatchGrid((0, 0), 1.0, 2, 1), ConstantLevelSet())).total_dofs == 45
    for n in (2, 3, 5):
        dofmap = build_dof_map(build_mesh(PatchGrid((0, 0), 1.0, n), ConstantLevelSet()))
        assert dofmap.total_dofs == (4 * n + 1) ** 2
        assert len(dofmap.boundary_dofs) == 4 * 4 * n


def test_shared_nodes_have_one_index():
    dofmap = build_dof_map(build_mesh(PatchGrid((0, 0), 1.0, 2, 1), ConstantLevelSet()))
    left = dofmap.patch_dofs(0, 0).reshape(5, 5)
    right = dofmap.patch_dofs(1, 0).reshape(5, 5)
    np.testing.assert_array_equal(left[:, 4], right[:, 0])


def test_global_continuity_across_patch_edges(line_mesh, rng):
    space = FiniteElementSpace(line_mesh)
    coefficients = rng.standard_normal(space.total_dofs)
    grid = line_mesh.grid
    t = np.linspace(0.05, 0.95, 7)
    for i, j in itertools.product(range(grid.n_x - 1), range(grid.n_y)):
        left, right = line_mesh.patch(i, j), line_mesh.patch(i + 1, j)
        if left.config.kind.value == "uncut" and right.config.kind.value == "uncut":
            continue
        values = []
        for record, xi in ((left, 1.0), (right, 0.0)):
            patch_map = PatchMap.for_record(record)
            c = coefficients[space.dofmap.patch_dofs(*record.index)]
            row = []
            for tk in t:
                point = np.array([xi, tk])
                sub_id = patch_map.basis.locate(point)
                phi, _ = patch_map.basis.eval(sub_id, point)
                row.append((patch_map.apply(point, sub_id), phi @ c))
            values.append(row)
        for (x_left, u_left), (x_right, u_right) in zip(*values):
            np.testing.assert_allclose(x_left, x_right, atol=1e-12)
            assert u_left == pytest.approx(u_right, abs=1e-12)


def test_linear_functions_are_reproduced(line_mesh):
    space = FiniteElementSpace(line_mesh)

    def u(x):
        return 0.3 - 1.2 * x[..., 0] + 2.5 * x[..., 1]

    coefficients = space.interpolate(u)
    for block in space.blocks:
        rule = triangle_rule(5) if block.cell == "triangle" else quad_rule(3)
        geo = element_geometry(block.coords, block.cell, rule)
        u_h = np.einsum("qn,en->eq", geo.values, coefficients[block.dofs])
        np.testing.assert_allclose(u_h, u(geo.points), atol=1e-12)


def test_lagrange_transform_is_identity(line_mesh):
    space = FiniteElementSpace(line_mesh)
    S = hierarchical_transform(line_mesh, space)
    np.testing.assert_array_equal(S.toarray(), np.eye(space.total_dofs))


def test_hierarchical_transform_is_invertible(line_mesh, rng):
    space = FiniteElementSpace(line_mesh, BasisKind.HIERARCHICAL)
    A = assemble_stiffness(line_mesh, space, _unit_spec(line_mesh.level_set))
    S = hierarchical_transform(line_mesh, space, A)
    S_inv = invert_transform(S)
    for _ in range(5):
        v = rng.standard_normal(space.total_dofs)
        np.testing.assert_allclose(S @ (S_inv @ v), v, atol=1e-10)


def test_hierarchical_functions_have_unit_energy(line_mesh):
    space = FiniteElementSpace(line_mesh, BasisKind.HIERARCHICAL)
    A = assemble_stiffness(line_mesh, space, _unit_spec(line_mesh.level_set))
    S = hierarchical_transform(line_mesh, space, A)
    diagonal = (S.T @ A @ S).diagonal()
    np.testing.assert_allclose(diagonal[space.dofmap.free_dofs], 1.0, rtol=1e-12)


def test_boundary_dofs_stay_nodal(line_mesh):
    space = FiniteElementSpace(line_mesh, BasisKind.HIERARCHICAL)
    A = assemble_stiffness(line_mesh, space, _unit_spec(line_mesh.level_set))
    S = hierarchical_transform(line_mesh, space, A).toarray()
    boundary = space.dofmap.boundary_dofs
    np.testing.assert_array_equal(S[boundary][:, boundary], np.eye(len(boundary)))
    assert np.all(S[boundary][:, space.dofmap.free_dofs] == 0.0)
