"""Exception types shared across the package."""


class LogcaveError(Exception):
    """Base class for all package-specific errors."""


class DomainMismatch(LogcaveError):
    """Two densities with different domain kinds were combined."""


class InvalidProbability(LogcaveError, ValueError):
    """Probability argument outside (0, 1)."""


class InvalidEpsilon(LogcaveError, ValueError):
    """Accuracy parameter outside its admissible range."""


class OutOfRange(LogcaveError, ValueError):
    """Level code outside the grid's level set."""


class OutOfSupport(LogcaveError, ValueError):
    """Query point where the density is zero and the quantity is undefined."""


class TooFewSamples(LogcaveError, ValueError):
    """Not enough samples to run the requested learner."""


class DegenerateCell(LogcaveError, ValueError):
    """Cell of nonpositive length passed to the per-cell error oracle."""


class NonfiniteMode(LogcaveError, ValueError):
    """Density handle has no finite mode."""


class HypothesisViolated(LogcaveError):
    """Interval passed to the linearizer violates its range hypothesis."""


class TooLarge(LogcaveError):
    """Brute-force enumeration bound exceeded."""


class ParseError(LogcaveError, ValueError):
    """Malformed density file or family specification."""
