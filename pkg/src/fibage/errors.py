"""Exception types shared across the package."""


class FibageError(Exception):
    """Base class for all package-specific errors."""


class NonErgodic(FibageError):
    """The chain cannot have a unique stationary distribution.

    Raised for non-positive rates or a state graph that is not strongly
    connected (self-loops excluded).
    """


class SingularSystem(FibageError):
    """A linear solve failed or produced an unusable solution."""


class NegativeFixedPoint(FibageError):
    """An age-balance solution came back with a materially negative entry.

    This signals a broken model or parameters outside the ergodic regime;
    entries are never clamped.
    """


class Unsupported(FibageError):
    """The requested quantity is not defined for this model variant."""


class InvalidConfig(FibageError):
    """A simulation or sweep configuration violates its invariants."""


class StructuralViolation(FibageError):
    """The simulator performed a transition not present in the model table."""


class UnknownFigure(FibageError):
    """No preset exists for the requested figure name."""
