"""
Implicit interface descriptions and root finding on lines

Sign convention: gamma < 0 is subdomain 1, gamma > 0 is subdomain 2.
All level sets accept points of shape (2,) or (..., 2).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

import config
from .exceptions import AssumptionViolation

logger = logging.getLogger(__name__)


class LevelSetField:
    """Abstract level set: value and exact gradient"""

    def __call__(self, x):
        raise NotImplementedError

    def gradient(self, x):
        raise NotImplementedError

    def side(self, x):
        """Subdomain index (1 or 2) at the given points"""
        return np.where(np.asarray(self(x)) > 0.0, 2, 1)


class AffineLevelSet(LevelSetField):
    """gamma(x, y) = a*x + b*y + c"""

    def __init__(self, a: float, b: float, c: float):
        self.a, self.b, self.c = float(a), float(b), float(c)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.a * x[..., 0] + self.b * x[..., 1] + self.c

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        grad = np.empty(x.shape, dtype=float)
        grad[..., 0] = self.a
        grad[..., 1] = self.b
        return grad

    @classmethod
    def through(cls, p, q, positive_side=None):
        """
        Line through p and q. If positive_side is given, the sign is chosen so
        that gamma(positive_side) > 0.
        """
        p = np.asarray(p, dtype=float)
        q = np.asarray(q, dtype=float)
        a, b = q[1] - p[1], p[0] - q[0]
        ls = cls(a, b, -(a * p[0] + b * p[1]))
        if positive_side is not None and ls(np.asarray(positive_side, dtype=float)) < 0:
            ls = cls(-ls.a, -ls.b, -ls.c)
        return ls


class CircleLevelSet(LevelSetField):
    """gamma = (x - x0)^2 + (y - y0)^2 - r^2, negative inside the disk"""

    def __init__(self, center=(0.0, 0.0), radius: float = 1.0):
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)

    def __call__(self, x):
        rel = np.asarray(x, dtype=float) - self.center
        return rel[..., 0] ** 2 + rel[..., 1] ** 2 - self.radius ** 2

    def gradient(self, x):
        return 2.0 * (np.asarray(x, dtype=float) - self.center)


class ParabolaLevelSet(LevelSetField):
    """gamma = y - 2 (x + shift)^2 + 0.5"""

    def __init__(self, shift: float = 0.0):
        self.shift = float(shift)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return x[..., 1] - 2.0 * (x[..., 0] + self.shift) ** 2 + 0.5

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        grad = np.empty(x.shape, dtype=float)
        grad[..., 0] = -4.0 * (x[..., 0] + self.shift)
        grad[..., 1] = 1.0
        return grad


class ConstantLevelSet(LevelSetField):
    """No interface at all"""

    def __init__(self, value: float = 1.0):
        self.value = float(value)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.full(x.shape[:-1], self.value) if x.ndim > 1 else self.value

    def gradient(self, x):
        return np.zeros(np.shape(x))


class CallableLevelSet(LevelSetField):
    """Wrap a pair of vectorised callables"""

    def __init__(self, value: Callable, gradient: Callable):
        self._value = value
        self._gradient = gradient

    def __call__(self, x):
        return self._value(np.asarray(x, dtype=float))

    def gradient(self, x):
        return self._gradient(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class LineCut:
    """Interface point at relative position r on a segment"""
    r: float
    point: np.ndarray

    def __repr__(self):
        return f"<LineCut(r={self.r:.6g}, point=({self.point[0]:.6g}, {self.point[1]:.6g}))>"


def count_sign_changes(values, zero_tol: float):
    """
    Number of sign changes along the last axis. Values with |v| <= zero_tol
    count as zero and are skipped.
    """
    values = np.asarray(values, dtype=float)
    signs = np.where(np.abs(values) <= zero_tol, 0.0, np.sign(values))
    positions = np.arange(signs.shape[-1])
    last_nonzero = np.where(signs != 0.0, positions, 0)
    last_nonzero = np.maximum.accumulate(last_nonzero, axis=-1)
    filled = np.take_along_axis(signs, last_nonzero, axis=-1)
    return np.sum(filled[..., 1:] * filled[..., :-1] < 0.0, axis=-1)


def expected_sign_changes(value_a, value_b, zero_tol: float):
    """1 when both endpoints are off the interface with opposite signs, else 0"""
    a_off = np.abs(value_a) > zero_tol
    b_off = np.abs(value_b) > zero_tol
    return (a_off & b_off & (np.sign(value_a) != np.sign(value_b))).astype(int)


def _safeguarded_newton(fun, lo, hi, t0, tol, max_iter, trace=None):
    """
    Newton iteration on fun(t) -> (value, derivative) kept inside the sign
    change bracket [lo, hi]; fun(lo) and fun(hi) must have opposite signs.
    Returns the root or None if max_iter is exhausted.
    """
    g_lo, _ = fun(lo)
    # t_neg is where fun < 0, t_pos where fun > 0
    t_neg, t_pos = (lo, hi) if g_lo < 0.0 else (hi, lo)
    t = t0
    for _ in range(max_iter):
        value, slope = fun(t)
        if abs(value) <= tol:
            return t
        if value < 0.0:
            t_neg = t
        else:
            t_pos = t
        low, high = min(t_neg, t_pos), max(t_neg, t_pos)
        accepted = False
        if slope != 0.0:
            candidate = t - value / slope
            accepted = low < candidate < high
        if not accepted:
            candidate = 0.5 * (low + high)
        if trace is not None:
            trace.append((candidate, accepted, low, high))
        if candidate == t:
            # bracket collapsed to machine precision
            value, _ = fun(t)
            return t if abs(value) <= tol else None
        t = candidate
    value, _ = fun(t)
    return t if abs(value) <= tol else None


def _line_function(ls: LevelSetField, origin, direction):
    def fun(t):
        x = origin + t * direction
        return float(ls(x)), float(np.dot(ls.gradient(x), direction))
    return fun


def find_edge_cut(ls: LevelSetField, a, b, tol: Optional[float] = None,
                  vertex_tol: Optional[float] = None, max_iter: Optional[int] = None,
                  samples: Optional[int] = None, trace: Optional[List] = None) -> Optional[LineCut]:
    """
    Locate the interface on the segment a -> b.

    Args:
        tol: residual tolerance |gamma| <= tol for the returned point
        vertex_tol: endpoints with |gamma| <= vertex_tol are reported as cuts at r = 0 or 1
        samples: number of sub-intervals of the multiple-crossing pre-scan
        trace: optional list receiving (t, newton_accepted, bracket_low, bracket_high)

    Returns:
        LineCut or None when the endpoint signs agree

    Raises:
        AssumptionViolation: the segment is crossed more than once or Newton fails
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    direction = b - a
    length = float(np.hypot(direction[0], direction[1]))
    if tol is None:
        tol = config.ROOT_TOL
    if vertex_tol is None:
        vertex_tol = config.VERTEX_TOL * np.sqrt(2.0) * length  # diameter of the square on a -> b
    if max_iter is None:
        max_iter = config.NEWTON_MAX_ITER
    if samples is None:
        samples = config.EDGE_SAMPLES
    if tol <= 0:
        raise ValueError("tol must be positive")

    t = np.linspace(0.0, 1.0, samples + 1)
    values = ls(a[None, :] + t[:, None] * direction[None, :])
    g_a, g_b = float(values[0]), float(values[-1])
    crossings = int(count_sign_changes(values, vertex_tol))
    if crossings > int(expected_sign_changes(g_a, g_b, vertex_tol)):
        raise AssumptionViolation(
            f"segment {a.tolist()} -> {b.tolist()} is crossed {crossings} times by the interface")

    if abs(g_a) <= vertex_tol:
        return LineCut(0.0, a.copy())
    if abs(g_b) <= vertex_tol:
        return LineCut(1.0, b.copy())
    if g_a * g_b > 0.0:
        return None

    r = _safeguarded_newton(_line_function(ls, a, direction), 0.0, 1.0, 0.5, tol, max_iter, trace)
    if r is None:
        raise AssumptionViolation(
            f"Newton iteration did not converge on segment {a.tolist()} -> {b.tolist()}")
    return LineCut(float(r), a + r * direction)


def project_along_direction(ls: LevelSetField, p, direction, tol: Optional[float] = None,
                            max_step: float = 1.0, max_iter: Optional[int] = None) -> Optional[np.ndarray]:
    """
    Move p along a unit direction onto the interface, |t| <= max_step.
    Returns None when no root is found within the step bound.
    """
    p = np.asarray(p, dtype=float)
    direction = np.asarray(direction, dtype=float)
    if tol is None:
        tol = config.ROOT_TOL
    if max_iter is None:
        max_iter = config.NEWTON_MAX_ITER
    if tol <= 0:
        raise ValueError("tol must be positive")

    fun = _line_function(ls, p, direction)
    g0, slope0 = fun(0.0)
    if abs(g0) <= tol:
        return p.copy()

    g_plus, _ = fun(max_step)
    g_minus, _ = fun(-max_step)
    brackets = []
    if g_plus * g0 <= 0.0:
        brackets.append((0.0, max_step))
    if g_minus * g0 <= 0.0:
        brackets.append((-max_step, 0.0))
    if len(brackets) == 2 and slope0 != 0.0 and -g0 / slope0 < 0.0:
        brackets.reverse()

    if brackets:
        lo, hi = brackets[0]
        t = _safeguarded_newton(fun, lo, hi, 0.5 * (lo + hi), tol, max_iter)
        if t is not None:
            return p + t * direction
        return None

    # no sign change at the step bounds: plain Newton confined to the step bound
    t, value, slope = 0.0, g0, slope0
    for _ in range(max_iter):
        if slope == 0.0:
            return None
        t -= value / slope
        if abs(t) > max_step:
            return None
        value, slope = fun(t)
        if abs(value) <= tol:
            return p + t * direction
    logger.debug("projection from %s did not converge", p)
    return None
