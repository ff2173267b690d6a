"""Exception and warning types raised across the package."""


class CliffordError(Exception):
    """Base class for all errors raised by cliffordtm."""


class UnsupportedDimension(CliffordError, ValueError):
    """Algebra dimension outside the supported range 1..6."""


class NotInvertible(CliffordError, ArithmeticError):
    """The Clifford number is a zero divisor (or zero)."""


class InconsistentSystem(CliffordError, ArithmeticError):
    """A Gram/cross pair for which <b,b> c = <a,b> has no solution."""


class DegenerateElement(CliffordError, ArithmeticError):
    """An element lies (numerically) in the module span of its predecessors.

    Attributes
    ----------
    index : int
        Zero-based position of the offending element.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class LengthMismatch(CliffordError, ValueError):
    """Sample array does not line up with the quadrature nodes."""


class PoleOutsideDomain(CliffordError, ValueError):
    """Kernel pole not strictly inside the ball / half space."""


class EvaluationSingularity(CliffordError, ArithmeticError):
    """Evaluation point (numerically) at a kernel singularity."""


class DomainMismatch(CliffordError, ValueError):
    """Two kernel atoms belong to different domains."""


class UnsupportedMultiplicity(CliffordError, ValueError):
    """Pole multiplicity would require second or higher order derivatives."""


class ConfigError(CliffordError, ValueError):
    """Malformed run configuration.

    Attributes
    ----------
    key : str
        Offending configuration key.
    """

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


class TruncationWarning(UserWarning):
    """Signal energy near the truncation boundary of a half-space lift."""
