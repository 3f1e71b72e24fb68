"""Exception types shared across the package."""


class DiKitError(Exception):
    """Base class for all errors raised by di_kit."""


class NonHermitianError(DiKitError, ValueError):
    pass


class NoConvergenceError(DiKitError, ArithmeticError):
    pass


class BadFactorIndexError(DiKitError, IndexError):
    pass


class RangeError(DiKitError, ValueError):
    """A scalar parameter lies outside its admissible interval."""


class InvalidStateError(DiKitError, ValueError):
    """Matrix is not a density matrix (trace or positivity violated)."""


class InvalidMeasurementError(DiKitError, ValueError):
    """Projectors are not idempotent, orthogonal or complete."""


class MarginalMismatchError(DiKitError, ValueError):
    pass


class NotAPOVMError(DiKitError, ValueError):
    pass


class DimensionMismatchError(DiKitError, ValueError):
    pass


class ShapeError(DiKitError, ValueError):
    pass


class LevelTooLowError(DiKitError, ValueError):
    """A polynomial needs moments that the chosen relaxation does not house."""


class NodesOutOfRangeError(DiKitError, ValueError):
    pass


class SolverError(DiKitError, RuntimeError):
    """The SDP solver failed; ``solution`` holds the last iterate."""

    def __init__(self, message, solution=None):
        super().__init__(message)
        self.solution = solution


class FixtureMissingError(DiKitError, FileNotFoundError):
    pass


class ConfigError(DiKitError, ValueError):
    """Scenario configuration is invalid; ``field`` names the culprit."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
