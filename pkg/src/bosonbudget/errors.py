"""Exception types shared across the package."""


class BosonBudgetError(Exception):
    """Base class for package-specific failures."""


class DimensionError(BosonBudgetError, ValueError):
    """Matrix or vector shapes are inconsistent."""


class PhotonCountError(BosonBudgetError, ValueError):
    """Input and output photon totals disagree."""


class ResourceLimitError(BosonBudgetError, RuntimeError):
    """Requested computation exceeds a configured size cap."""


class NumericError(BosonBudgetError, ArithmeticError):
    """A numeric evaluation failed or lost too much accuracy."""


class InfeasibleBudgetError(BosonBudgetError, ValueError):
    """No setting of the free parameter can satisfy the error budget."""

    def __init__(self, message: str, dominant_term: str | None = None):
        super().__init__(message)
        self.dominant_term = dominant_term
