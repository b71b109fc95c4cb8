"""Exception types shared across the package."""


class GridIrlError(Exception):
    """Base class for all gridirl errors."""


class OutOfBounds(GridIrlError):
    """A continuous point or grid state lies outside the grid."""


class NonAdjacentJump(GridIrlError):
    """Consecutive trajectory states are further than one cell apart.

    Usually means the cell size is too small for the GPS sampling rate
    and densification was disabled.
    """


class HorizonExceeded(GridIrlError):
    """A time-augmented transition would step past the last time layer."""


class DimensionMismatch(GridIrlError):
    """Vector/feature dimensions do not agree."""


class NonFinite(GridIrlError):
    """A computation produced inf/nan weights (learning rate too large)."""


class TooLarge(GridIrlError):
    """Enumeration problem exceeds the tractability guard."""


class DemoInfeasible(GridIrlError):
    """A demonstration path is not inside the enumerated path set."""


class TooShort(GridIrlError):
    """Trajectory too short for the requested gap mask."""


class EmptyInput(GridIrlError):
    """An operation received an empty point sequence."""


class LengthMismatch(GridIrlError):
    """Paired sequences have different lengths."""


class GapUnreachable(GridIrlError):
    """No generation attempt reached the gap's end state."""


class ConfigError(GridIrlError):
    """Inconsistent or unsupported configuration."""


class ParseError(GridIrlError):
    """Malformed input file; carries the offending line number."""

    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no
