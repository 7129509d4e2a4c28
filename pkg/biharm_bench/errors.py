from typing import Sequence


class VerificationError(RuntimeError):
    """
    Base class for every failure raised by the verification engine.
    """


class OrderOverflowError(VerificationError):
    """A derivative beyond the order carried by a jet was requested."""


class DomainError(VerificationError):
    """A map was evaluated outside its domain (e.g. square root of a negative)."""


class StepTooSmallError(VerificationError):
    """Finite-difference step below the cancellation guard."""


class DegenerateImmersionError(VerificationError):
    """The differential of the immersion is not of full rank."""


class NotTangentError(VerificationError):
    """A vector was expected to be tangent (horizontal for lifts) and is not."""


class NotNormalError(VerificationError):
    """A field was expected to be normal to the submanifold and is not."""


class NotLagrangianError(VerificationError):
    """The input fails a Lagrangian or Legendrian requirement."""


class MinimalPointError(VerificationError):
    """The mean curvature vector vanishes where a nonzero one is required."""


class NotHUmbilicalError(VerificationError):
    """The second fundamental form does not have the H-umbilical shape."""


class ReductionInapplicableError(VerificationError):
    """The reduced H-umbilical system does not apply at this point."""


class IntegrationDriftError(VerificationError):
    """An ODE invariant drifted beyond tolerance."""


class ConsistencyError(VerificationError):
    """Two independent computations of the same quantity disagree."""


class CatalogError(VerificationError):
    """Unknown catalog entry or invalid catalog parameters."""


class PointEvaluationError(VerificationError):
    def __init__(self, point: Sequence[float], cause: Exception) -> None:
        self.point = tuple(float(x) for x in point)
        self.cause = cause
        super().__init__(
            f"Evaluation failed at chart point {self.point}: "
            f"{type(cause).__name__}: {cause}"
        )


class ReportWriteError(VerificationError):
    """A report could not be written to the requested path."""
