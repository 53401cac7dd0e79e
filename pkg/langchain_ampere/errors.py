"""Exception hierarchy for the Ampere toolkit.

Input-contract violations derive from ``ValueError`` and numerical failures from
``RuntimeError`` so callers can keep catching the builtin types.
"""

from __future__ import annotations

from typing import Optional, Sequence


class AmpereError(Exception):
    """Base class for all toolkit errors."""


class DomainError(AmpereError, ValueError):
    """Domain polygon is non-convex, degenerate or a point lies outside it."""


class ConvexityError(AmpereError, ValueError):
    """A function failed its convexity certificate."""


class MeshMismatchError(AmpereError, ValueError):
    """Two functions that must share a mesh or grid do not."""


class PSDError(AmpereError, ValueError):
    """A matrix expected to be positive semidefinite is not."""


class BoundaryDataError(AmpereError, ValueError):
    """Boundary data violates a precondition (nonzero, negative, non-finite)."""


class StencilError(AmpereError, ValueError):
    """A grid node lacks the neighbours a stencil needs."""


class ParameterError(AmpereError, ValueError):
    """Caller-supplied parameters are out of range or inconsistent."""


class EmptyArtifactError(AmpereError, ValueError):
    """Nothing to render or write."""


class SolverError(AmpereError, RuntimeError):
    """An iterative solver failed.

    Attributes:
        residual: Last residual norm reached, if known.
        history: Residual history, oldest first.
    """

    def __init__(
        self,
        message: str,
        *,
        residual: Optional[float] = None,
        history: Optional[Sequence[float]] = None,
    ) -> None:
        super().__init__(message)
        self.residual = residual
        self.history = list(history) if history is not None else []


class ConvergenceError(SolverError):
    """Iteration limit reached before the tolerance."""


class LinearSolveError(SolverError):
    """Krylov iteration stalled."""


class DegenerateHessianError(SolverError):
    """Discrete Hessian is not positive semidefinite where it must be."""


class AdmissibleRangeError(SolverError):
    """The w field left the admissible range of the continuation."""


class FixedPointStall(SolverError):
    """Continuation could not reach the next parameter value.

    Attributes:
        t_reached: Largest parameter value with a converged state.
    """

    def __init__(
        self,
        message: str,
        *,
        t_reached: float,
        residual: Optional[float] = None,
        history: Optional[Sequence[float]] = None,
    ) -> None:
        super().__init__(message, residual=residual, history=history)
        self.t_reached = t_reached
