"""
Manufactured interface problems on (-2, 2)^2

Both examples use u_i = sin(l) / nu_i with the level set l, so u vanishes on
the interface and nu_i grad u_i = cos(l) grad l is branch independent: the
jump conditions hold exactly and f = -div(nu_i grad u_i) is the same on both
sides.
"""
from dataclasses import dataclass
from typing import Callable

import numpy as np

import config
from fem import CircleLevelSet, LevelSetField, ParabolaLevelSet, ProblemSpec

CIRCLE_RADIUS = 0.3
CIRCLE_CENTER = (1.0, 1.2)


@dataclass
class ExampleDefinition:
    name: str
    shift: float
    level_set: LevelSetField
    problem: ProblemSpec
    source: Callable

    def __repr__(self):
        return f"<ExampleDefinition(name='{self.name}', shift={self.shift:g})>"


def _problem(ls: LevelSetField, source: Callable) -> ProblemSpec:
    nu1, nu2 = config.NU_1, config.NU_2

    def branch(nu):
        def value(x):
            return np.sin(ls(x)) / nu

        def gradient(x):
            return (np.cos(ls(x)) / nu)[..., None] * ls.gradient(x)
        return value, gradient

    u1, grad_u1 = branch(nu1)
    u2, grad_u2 = branch(nu2)

    def boundary(x):
        return np.where(ls(x) > 0.0, u2(x), u1(x))

    return ProblemSpec(nu1=nu1, nu2=nu2, f1=source, f2=source, g=boundary, level_set=ls,
                       u1=u1, u2=u2, grad_u1=grad_u1, grad_u2=grad_u2)


def parabola_example(shift: float = 0.0) -> ExampleDefinition:
    """l = y - 2 (x + shift)^2 + 0.5"""
    ls = ParabolaLevelSet(shift)

    def source(x):
        x = np.asarray(x, dtype=float)
        l = ls(x)
        return 4.0 * np.cos(l) + np.sin(l) * (16.0 * (x[..., 0] + shift) ** 2 + 1.0)

    return ExampleDefinition("parabola", shift, ls, _problem(ls, source), source)


def circle_example(shift: float = 0.0) -> ExampleDefinition:
    """l = (x - x0)^2 + (y - y0)^2 - 0.09 with (x0, y0) = (1 + shift, 1.2)"""
    x0, y0 = CIRCLE_CENTER[0] + shift, CIRCLE_CENTER[1]
    ls = CircleLevelSet((x0, y0), CIRCLE_RADIUS)

    def source(x):
        x = np.asarray(x, dtype=float)
        l = ls(x)
        return -4.0 * np.cos(l) + 4.0 * np.sin(l) * ((x[..., 0] - x0) ** 2 + (x[..., 1] - y0) ** 2)

    return ExampleDefinition("circle", shift, ls, _problem(ls, source), source)


EXAMPLES = {
    "parabola": parabola_example,
    "circle": circle_example,
}


def build_example(name: str, shift: float = 0.0) -> ExampleDefinition:
    try:
        factory = EXAMPLES[name]
    except KeyError:
        raise ValueError(f"unknown example {name!r}, choose from {sorted(EXAMPLES)}") from None
    return factory(shift)
