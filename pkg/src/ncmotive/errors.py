"""Exception hierarchy.

Two families: :class:`InputError` for bad requests (the CLI maps these to
exit code 2) and :class:`InvariantViolation` for internal consistency
failures that should never happen on valid input (exit code 3).
"""


class NCMotiveError(Exception):
    """Base class for every error raised by this package."""


class InputError(NCMotiveError, ValueError):
    pass


class InvariantViolation(NCMotiveError, RuntimeError):
    pass


# arith
class TagError(InputError):
    pass


class TagMismatch(InputError):
    pass


class NotInvertible(InputError, ZeroDivisionError):
    pass


class NotIdempotent(InputError):
    pass


class NonIntegerTrace(InvariantViolation):
    pass


# charclasses
class TruncationMismatch(InputError):
    pass


# qform
class Singular(InputError):
    pass


class NotSymmetric(InputError):
    pass


# motive
class ShapeMismatch(InputError):
    pass


class SupportViolation(InvariantViolation):
    pass


class NotInverse(InputError):
    pass


class RangeViolation(InputError):
    pass


class NonFreeFactor(InvariantViolation):
    pass


class DimensionTooSmall(InputError):
    pass


class TagTooSmall(InputError):
    pass


# grr
class DenominatorOutsideTag(InputError):
    def __init__(self, prime: int, where: str = ""):
        self.prime = prime
        msg = f"denominator prime {prime} is not inverted by the tag"
        if where:
            msg += f" ({where})"
        super().__init__(msg)


class NonIntegerEuler(InvariantViolation):
    pass
