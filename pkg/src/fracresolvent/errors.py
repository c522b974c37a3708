"""Exception hierarchy.

Every error raised by the library derives from :class:`FracResolventError`.
The three intermediate classes decide the CLI exit code: configuration
problems exit with 2, failed verifications with 1 and everything else
(numerical trouble, bad arguments) with 3.
"""

from __future__ import annotations


class FracResolventError(Exception):
    """Base class for all library errors."""


class NumericalError(FracResolventError):
    """A computation could not be carried out to the requested accuracy."""


class ConfigError(FracResolventError):
    """A run configuration is malformed."""


class VerificationError(FracResolventError):
    """A self-check on a computed object failed."""


# specfun
class PoleError(NumericalError, ValueError):
    pass


class DomainError(NumericalError, ValueError):
    pass


class ConvergenceError(NumericalError):
    pass


# laplace
class TailError(NumericalError):
    pass


class ContourError(NumericalError):
    pass


# kernels
class SymbolZeroError(NumericalError):
    pass


class DegreeError(NumericalError, ValueError):
    pass


class GridError(NumericalError, ValueError):
    pass


# mlo
class DimensionError(NumericalError, ValueError):
    pass


class NotInResolventSet(NumericalError):
    """Raised when ``lam`` is not in the C-resolvent set.

    ``reason`` is ``"range"`` when R(C) is not contained in R(lam - A) and
    ``"multivalued"`` when (lam - A)^{-1} C is not single valued.
    """

    def __init__(self, reason: str, lam=None, detail: str = ""):
        self.reason = reason
        self.lam = lam
        msg = f"not in the C-resolvent set ({reason})"
        if lam is not None:
            msg += f" at lambda={lam!r}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


# resolvent
class WeightError(NumericalError, ValueError):
    pass


# multiplier
class DivisionError(NumericalError, ZeroDivisionError):
    pass


class BranchError(NumericalError):
    pass


class ShapeError(NumericalError, ValueError):
    pass


class CompatibilityError(NumericalError, ValueError):
    pass


class TruncationError(NumericalError, ValueError):
    pass
