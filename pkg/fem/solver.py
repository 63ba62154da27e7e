"""
Jacobi-preconditioned conjugate gradients and extreme eigenvalue estimates
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp

import config
from .assembly import LinearSystem
from .exceptions import MaxIterationsExceeded
from .fe_space import invert_transform

logger = logging.getLogger(__name__)


@dataclass
class CGResult:
    solution: np.ndarray
    iterations: int
    residual: float  # relative, ||b - A x|| / ||b|| of the original system
    converged: bool

    def __repr__(self):
        return f"<CGResult(iterations={self.iterations}, residual={self.residual:.3e})>"


def _pcg(A, b, tol, max_iter, x0=None, callback=None):
    diagonal = A.diagonal()
    if np.any(diagonal <= 0.0):
        raise ValueError("Jacobi preconditioner needs a positive diagonal")
    inverse_diagonal = 1.0 / diagonal

    b_norm = np.linalg.norm(b)
    if b_norm == 0.0:
        return CGResult(np.zeros_like(b), 0, 0.0, True)
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=float)
    r = b - A @ x
    residual = np.linalg.norm(r) / b_norm
    if residual <= tol:
        return CGResult(x, 0, residual, True)
    z = inverse_diagonal * r
    p = z.copy()
    rz = r @ z

    for k in range(1, max_iter + 1):
        Ap = A @ p
        alpha = rz / (p @ Ap)
        x += alpha * p
        r -= alpha * Ap
        if callback is not None:
            callback(x)
        residual = np.linalg.norm(r) / b_norm
        if residual <= tol:
            return CGResult(x, k, residual, True)
        z = inverse_diagonal * r
        rz_next = r @ z
        p = z + (rz_next / rz) * p
        rz = rz_next
    raise MaxIterationsExceeded("conjugate gradients did not converge", residual, max_iter)


def _relative_residual(A, b, x):
    b_norm = np.linalg.norm(b)
    return 0.0 if b_norm == 0.0 else float(np.linalg.norm(b - A @ x) / b_norm)


def cg_solve(system, rhs=None, tol: Optional[float] = None, max_iter: Optional[int] = None,
             transform=None, x0=None, callback: Optional[Callable] = None) -> CGResult:
    """
    Solve an SPD system with Jacobi-preconditioned CG.

    Args:
        system: LinearSystem, or a sparse matrix when rhs is given
        transform: change of basis S; S^T A S y = S^T b is solved and x = S y returned
            (CG continues on A x = b when ||b - A x|| / ||b|| is still above tol)
        callback: called with the current iterate after every iteration

    Raises:
        MaxIterationsExceeded: carrying the final relative residual
    """
    if rhs is None:
        A, b = system.matrix, system.rhs
    else:
        A, b = system, rhs
    A = sp.csr_matrix(A)
    b = np.asarray(b, dtype=float)
    tol = config.CG_TOL if tol is None else tol
    max_iter = config.CG_MAX_ITER if max_iter is None else max_iter

    if transform is None:
        result = _pcg(A, b, tol, max_iter, x0, callback)
    else:
        S = sp.csr_matrix(transform)
        A_t = (S.T @ A @ S).tocsr()
        inner = None if callback is None else (lambda y: callback(S @ y))
        y0 = None
        if x0 is not None:
            y0 = invert_transform(S) @ np.asarray(x0, dtype=float)
        inner_result = _pcg(A_t, S.T @ b, tol, max_iter, y0, inner)
        x = S @ inner_result.solution
        result = CGResult(x, inner_result.iterations, _relative_residual(A, b, x), True)
        if result.residual > tol:
            logger.debug("transformed CG stopped at original residual %.3e, refining", result.residual)
            refined = _pcg(A, b, tol, max(max_iter - result.iterations, 1), x, callback)
            result = CGResult(refined.solution, result.iterations + refined.iterations, refined.residual, True)
    logger.debug("CG: %d iterations, relative residual %.3e", result.iterations, result.residual)
    return result


@dataclass
class ConditionEstimate:
    lambda_max: float
    lambda_min: float
    power_iterations: int
    inverse_iterations: int

    @property
    def cond(self):
        return self.lambda_max / self.lambda_min

    def __iter__(self):
        yield self.lambda_max
        yield self.lambda_min
        yield self.cond


def estimate_condition(system, free_dofs=None, tol: Optional[float] = None, max_iter: Optional[int] = None,
                       inner_tol: float = 1e-12, seed: int = 0) -> ConditionEstimate:
    """
    Extreme eigenvalues of an SPD matrix restricted to the free dofs: the
    largest by power iteration, the smallest by inverse iteration with CG as
    the inner solver. Both use Rayleigh quotients with a relative stopping
    tolerance.

    Raises:
        MaxIterationsExceeded: when an inner CG solve fails
    """
    if isinstance(system, LinearSystem):
        matrix = system.matrix
        if free_dofs is None:
            free_dofs = system.free_dofs
    else:
        matrix = system
    A = sp.csr_matrix(matrix)
    if free_dofs is not None:
        A = A[free_dofs][:, free_dofs].tocsr()
    tol = config.COND_TOL if tol is None else tol
    max_iter = config.COND_MAX_ITER if max_iter is None else max_iter
    rng = np.random.default_rng(seed)
    n = A.shape[0]

    def iterate(apply, label):
        x = rng.standard_normal(n)
        x /= np.linalg.norm(x)
        previous = None
        for k in range(1, max_iter + 1):
            y = apply(x)
            value = float(x @ y)
            x = y / np.linalg.norm(y)
            if previous is not None and abs(value - previous) <= tol * abs(value):
                return value, k
            previous = value
        logger.warning("%s iteration stopped at the iteration limit (%d)", label, max_iter)
        return value, max_iter

    lambda_max, power_its = iterate(lambda x: A @ x, "power")
    mu, inverse_its = iterate(lambda x: cg_solve(A, x, tol=inner_tol).solution, "inverse")
    estimate = ConditionEstimate(lambda_max, 1.0 / mu, power_its, inverse_its)
    logger.info("condition estimate %.4e (lambda_max %.4e, lambda_min %.4e)",
                estimate.cond, estimate.lambda_max, estimate.lambda_min)
    return estimate
