"""Exception hierarchy.

Every error raised on purpose by the library derives from :class:`DualMinkError`.
Errors that stem from bad input derive from :class:`InputError` as well; the
CLI maps those to exit code 2 and the numerical failures to exit code 3.
"""


class DualMinkError(Exception):
    pass


class InputError(DualMinkError):
    pass


class NumericalError(DualMinkError):
    pass


# group
class NotOrthogonal(InputError):
    pass


class GroupTooLarge(InputError):
    pass


class UnsupportedDimension(InputError):
    pass


# bodies
class UnboundedBody(InputError):
    pass


class BadHeight(InputError):
    pass


class InternalUnbounded(NumericalError):
    pass


class DimensionUnsupported(InputError):
    pass


class DegenerateInput(InputError):
    pass


class NoConvergence(NumericalError):
    pass


# solver
class NonPositiveHeight(InputError):
    pass


class InvalidProblem(InputError):
    pass


class ReducibleGroup(InputError):
    pass


class MeasureNotInvariant(InputError):
    pass


class QNotInvariant(InputError):
    pass


class SupportMismatch(InputError):
    pass


class NoSolution(InputError):
    pass


class Diverged(NumericalError):
    pass


class MaxIterations(NumericalError):
    pass


# classify
class SearchExhausted(NumericalError):
    pass
