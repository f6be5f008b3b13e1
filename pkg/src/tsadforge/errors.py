"""Exception types shared across the package."""


class TsadForgeError(Exception):
    """Base class for all package errors."""


class InvalidConfig(TsadForgeError):
    """Raised when a generator config violates its invariants."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class NonStationaryAR(TsadForgeError):
    """AR polynomial has roots on or inside the unit circle."""


class LengthMismatch(TsadForgeError):
    """Series passed together do not share a common length."""


class ShapeMismatch(TsadForgeError):
    """Array shapes are inconsistent with the declared system."""


class KindMismatch(TsadForgeError):
    """Anomaly kind is not applicable to the given target."""


class WindowOutOfRange(TsadForgeError):
    """Anomaly window does not fit inside the series."""


class NoGroundTruth(TsadForgeError):
    """Metric requires at least one ground-truth anomaly segment."""


class EmptyInput(TsadForgeError):
    """Detector received an empty series."""


class InputTooShort(TsadForgeError):
    """Detector received a series shorter than its window requires."""


class SchemaError(TsadForgeError):
    """On-disk dataset layout or schema version is not recognized."""


class DigestMismatch(TsadForgeError):
    """Stored content digest does not match recomputed digest."""
