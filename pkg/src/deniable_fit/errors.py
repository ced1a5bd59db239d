"""Exception types shared across the package."""


class DeniableFitError(Exception):
    """Base class for every package-specific error."""


class DimensionMismatch(DeniableFitError):
    """Operands have incompatible shapes."""


class DimensionTooSmall(DeniableFitError):
    """Ambient dimension is too small for the construction (need n >= 2)."""


class ZeroErrorVector(DeniableFitError):
    """The residual vector is numerically zero, so no anchoring norm exists."""


class RejectionExhausted(DeniableFitError):
    """Rejection sampling for the anchor direction ran out of retries."""


class VariantMismatch(DeniableFitError):
    """Operation requires a different inner-norm variant."""


class LengthMismatch(DeniableFitError):
    """A sequence argument has the wrong number of entries."""


class EmptyInput(DeniableFitError):
    """An input that must be non-empty was empty."""


class NoEvaluator(DeniableFitError):
    """The model cannot be evaluated numerically (no evaluator configured)."""


class NonFiniteValue(DeniableFitError):
    """A model evaluation produced NaN or infinity."""


class NonFiniteObjective(DeniableFitError):
    """The objective is NaN or infinite at the start point."""


class NonPositiveSupport(DeniableFitError):
    """A distribution has empty support or a non-positive rate."""


class InvalidArguments(DeniableFitError):
    """Arguments violate a documented precondition."""


class ColumnError(DeniableFitError):
    """Base for errors tied to one output column of a residual matrix."""

    def __init__(self, column: int, message: str = ""):
        self.column = column
        super().__init__(message or f"{type(self).__name__} in output column {column}")


class RankConditionViolated(ColumnError):
    """Residual column lies in the Jacobian's column space; crafting fails."""


class ZeroResidual(ColumnError):
    """Decoy data fits the model perfectly in some output column."""


class CertificateTampered(DeniableFitError):
    """Certificate contents do not match recomputation from its own data."""
