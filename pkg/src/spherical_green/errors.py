"""Exception hierarchy.

The CLI maps these onto exit codes, so every failure raised by the library
derives from :class:`SphericalGreenError`.
"""


class SphericalGreenError(Exception):
    """Base class for all library errors."""


class PoleError(SphericalGreenError, ValueError):
    """A Gamma function (or closed form built from one) hit a pole."""


class DomainError(SphericalGreenError, ValueError):
    """An argument lies outside the documented domain."""


class KernelObstruction(SphericalGreenError):
    """The operator has a nontrivial kernel beyond the constants, or a zero eigenvalue."""


class ConvergenceError(SphericalGreenError, ArithmeticError):
    """An iterative or extrapolated computation failed to settle."""


class ChartError(SphericalGreenError, ValueError):
    """A point left the coordinate chart of a graph surface."""


class DegreeCapError(SphericalGreenError, OverflowError):
    """A polynomial exceeded the configured degree cap."""


class InexactDivisionError(SphericalGreenError, ArithmeticError):
    """A polynomial division that must be exact left a remainder."""
