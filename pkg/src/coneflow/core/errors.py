"""Exception hierarchy shared by all coneflow modules.

Every error names the module that raised it and, when the failure is local,
the index of the first failing node or sample in lexicographic order.
"""

from .types import *


class ConeflowError(ValueError):
    """Base class for errors raised by coneflow."""

    def __init__(
        self, message: str, module: str = "coneflow", index: Optional[int] = None
    ) -> None:
        """Initialize the error.

        Args:
            message: The human readable description.
            module: The module that raised the error.
            index: The node or sample index where the failure was detected.
        """
        self.module = module
        self.index = index
        self.detail = message
        where = f"[{module}]" if index is None else f"[{module} @ index {index}]"
        super().__init__(f"{where} {message}")


class ChartDegeneracyError(ConeflowError):
    """A chart point lies inside an exclusion zone of the base chart."""


class ApexError(ConeflowError):
    """A radial coordinate fell below the apex cutoff."""


class DegenerateMetricError(ConeflowError):
    """The induced metric is not positive definite at some node."""


class StabilityError(ConeflowError):
    """The requested time step exceeds the parabolic stability bound."""


class NonConvergenceError(ConeflowError):
    """An iteration did not converge, e.g. the time step underflowed."""

    def __init__(
        self,
        message: str,
        module: str = "coneflow",
        index: Optional[int] = None,
        state: Any = None,
    ) -> None:
        """Initialize the error with the final state snapshot."""
        super().__init__(message, module=module, index=index)
        self.state = state


class DomainError(ConeflowError):
    """An argument lies outside the domain of a closed-form expression."""


class EmptyLevelSetError(ConeflowError):
    """Seeded root finding found no point on the requested level set."""


class FrameDegeneracyError(ConeflowError):
    """A tangent frame is degenerate (the level set is singular there)."""


class MeshValidationError(ConeflowError):
    """A mesh is not a closed, oriented 2-manifold or is malformed."""


class InsufficientSamplesError(ConeflowError):
    """Too few samples for a finite-difference or fitting procedure."""


class InconclusiveClassificationError(ConeflowError):
    """The blow-up time estimate is not stable enough to classify."""


class ConfigValidationError(ConeflowError):
    """An experiment or settings file failed validation."""
