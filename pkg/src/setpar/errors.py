"""Exception types shared across the package."""

__all__ = [
    "SetparError",
    "InfeasibleStartError",
    "NumericObjectiveError",
    "IllPosedRegimeError",
    "EstimationError",
    "DataFormatError",
]


class SetparError(Exception):
    """Base class for errors raised by this package."""


class InfeasibleStartError(SetparError, ValueError):
    """Optimization was started outside the feasible region."""


class NumericObjectiveError(SetparError, ArithmeticError):
    """The objective returned a non-finite value; carries the offending point."""

    def __init__(self, message: str, point):
        super().__init__(message)
        self.point = point


class IllPosedRegimeError(SetparError, ValueError):
    """A threshold leaves one regime without observations; names the regime."""

    def __init__(self, regime: str, r: int, count: int):
        super().__init__(
            f"threshold r={r} leaves the {regime} regime with {count} observation(s); "
            "both regimes must be visited"
        )
        self.regime = regime
        self.r = r
        self.count = count


class EstimationError(SetparError, RuntimeError):
    """Model fitting failed for every admissible configuration."""


class DataFormatError(SetparError, ValueError):
    """An input file violates the documented format; names the location."""
