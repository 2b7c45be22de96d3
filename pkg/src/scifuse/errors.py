"""Exception hierarchy for scifuse."""


class SciFuseError(Exception):
    """Base class for all errors raised by this package."""


class NotPSDError(SciFuseError, ValueError):
    """A matrix expected to be positive semidefinite is not."""


class DegenerateGeometry(SciFuseError, ValueError):
    """The two estimate means are too close for the range linearization."""


class DegenerateInformation(SciFuseError, ValueError):
    """A fusion denominator vanished (no information along the measured direction)."""


class DegenerateDecomposition(SciFuseError):
    """The partial-fraction form of a cost does not exist for these parameters."""


class ScenarioError(SciFuseError, ValueError):
    """Invalid or malformed scenario input."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
