import numpy as np
import pytest

from fem import (ErrorReport, FiniteElementSpace, ProblemSpec, attach_eoc, build_mesh, compute_eoc, l2_error,
                 modified_energy_error)
from experiments.examples import build_example
from experiments.runner import make_grid


def _linear_spec(ls):
    def u(x):
        return 0.5 + x[..., 0] - 3.0 * x[..., 1]

    def grad_u(x):
        return np.broadcast_to(np.array([1.0, -3.0]), np.shape(x)).copy()

    zero = lambda x: np.zeros(np.shape(x)[:-1])  # noqa: E731
    return ProblemSpec(nu1=3.0, nu2=3.0, f1=zero, f2=zero, g=u, level_set=ls,
                       u1=u, u2=u, grad_u1=grad_u, grad_u2=grad_u)


def test_eoc_from_two_errors():
    assert compute_eoc(1.74e-4, 2.13e-5) == pytest.approx(3.03, abs=5e-3)
    assert compute_eoc(8.0, 1.0) == pytest.approx(3.0)
    assert compute_eoc(1e-3, 1e-3) == 0.0


def test_eoc_rejects_non_positive_errors():
    with pytest.raises(ValueError):
        compute_eoc(0.0, 1e-3)
    with pytest.raises(ValueError):
        compute_eoc(1e-3, -1.0)


def test_attach_eoc_fills_halving_rows_only():
    reports = [
        ErrorReport(h=1 / 8, l2_error=8e-3, energy_error=4e-2),
        ErrorReport(h=1 / 16, l2_error=1e-3, energy_error=1e-2),
        ErrorReport(h=1 / 64, l2_error=1e-4, energy_error=1e-3),
    ]
    attach_eoc(reports)
    assert reports[0].eoc_l2 is None
    assert reports[1].eoc_l2 == pytest.approx(3.0)
    assert reports[1].eoc_energy == pytest.approx(2.0)
    assert reports[2].eoc_l2 is None
    assert reports[2].eoc_energy is None


def test_interpolated_linear_function_has_zero_error(line_mesh):
    spec = _linear_spec(line_mesh.level_set)
    space = FiniteElementSpace(line_mesh)
    u_h = space.interpolate(spec.u1)
    assert l2_error(line_mesh, space, u_h, spec) < 1e-12
    assert modified_energy_error(line_mesh, space, u_h, spec) < 1e-11


def test_error_is_positive_for_a_perturbed_field(line_mesh):
    spec = _linear_spec(line_mesh.level_set)
    space = FiniteElementSpace(line_mesh)
    u_h = space.interpolate(spec.u1) + 1e-3
    # constant offset: L2 error is 1e-3 times the unit square area
    assert l2_error(line_mesh, space, u_h, spec) == pytest.approx(1e-3, rel=1e-10)
    assert modified_energy_error(line_mesh, space, u_h, spec) < 1e-11


def test_refined_quadrature_gives_stable_errors():
    example = build_example("parabola")
    mesh = build_mesh(make_grid(1 / 16), example.level_set)
    space = FiniteElementSpace(mesh)
    spec = example.problem
    u_h = space.interpolate(lambda x: spec.exact(spec.level_set.side(x), x))
    for measure in (l2_error, modified_energy_error):
        plain = measure(mesh, space, u_h, spec)
        refined = measure(mesh, space, u_h, spec, refined=True)
        assert plain > 0.0
        assert refined == pytest.approx(plain, rel=1e-2)
