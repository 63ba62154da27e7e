"""
Exception hierarchy for the finite element library
"""


class LmfemError(Exception):
    """Base class for all library errors"""


class AssumptionViolation(LmfemError):
    """
    The interface is not resolved by the patch grid: an edge is cut more than
    once, or the interface enters and leaves a patch through the same edge.
    """

    def __init__(self, message, patch=None):
        self.patch = patch
        if patch is not None:
            message = f"{message} (patch {tuple(patch)})"
        super().__init__(message)


class DegenerateGeometry(LmfemError):
    """A sub-element has zero area or an edge of zero length"""


class NonPositiveJacobian(LmfemError):
    """An isoparametric map is not orientation preserving at a quadrature point"""


class MaxIterationsExceeded(LmfemError):
    """An iterative solver ran out of iterations"""

    def __init__(self, message, residual, iterations):
        self.residual = residual
        self.iterations = iterations
        super().__init__(f"{message} (residual={residual:.3e}, iterations={iterations})")
