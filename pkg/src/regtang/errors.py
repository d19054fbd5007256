"""Exception taxonomy shared by all modules.

Every failure mode that callers are expected to handle gets its own class so
tests (and the CLI's machine-readable error objects) can discriminate without
string matching.
"""


class RegtangError(Exception):
    """Base class for all package errors."""


# --- field / classification errors -----------------------------------------

class DomainError(RegtangError):
    """A point lies outside the rectangular domain a field was declared on."""


class UnresolvedContact(RegtangError):
    """All Lie derivatives up to the requested order are below tolerance."""


class DegenerateDenominator(RegtangError):
    """The sliding-field denominator X^-h - X^+h is numerically zero."""


class OutOfRange(RegtangError):
    """Argument outside the invertibility range of the transition function."""


class ClassMismatch(RegtangError):
    """phi^{(n)}(1) = 0, so phi is not of the claimed smoothness class."""


class BadValuation(RegtangError):
    """A polynomial does not vanish to the required order at the origin."""


class PrecisionWarning(UserWarning):
    """Finite differences used where they lose significant accuracy."""


# --- integration errors -----------------------------------------------------

class StepSizeUnderflow(RegtangError):
    """The adaptive integrator could not resolve the requested tolerance."""


class DomainExit(RegtangError):
    """A trajectory left the admissible region (norm guard tripped)."""


class NoCrossing(RegtangError):
    """No admissible section crossing happened within max_time."""


class TangentialGraze(RegtangError):
    """The section residual touched zero without changing sign."""

    def __init__(self, message, t=None, point=None):
        super().__init__(message)
        self.t = t
        self.point = point


# --- regularization / slow-manifold errors ----------------------------------

class NotCanonical(RegtangError):
    """The Filippov system is not in canonical band coordinates (X^- = (0,1), h = y)."""


class ConditionViolated(RegtangError):
    """f(x, 0) >= 0 somewhere on [-L, 0): the critical manifold is not defined."""


class TransientNotDecayed(RegtangError):
    """The slow-manifold proxy trajectory has not locked on before the check grid."""


# --- transition-map errors ----------------------------------------------------

class NoExit(RegtangError):
    """The band trajectory failed to reach the exit edge within max_time."""


class NoRoot(RegtangError):
    """Root bracketing failed for the tangency curve."""


class LeftWindow(RegtangError):
    """A trajectory escaped the working window of the local analysis."""


class SlidingCapture(RegtangError):
    """A band trajectory exited through the bottom edge (integration fault)."""


class NoReturn(RegtangError):
    """The orbit did not come back to the section (mirror/return map)."""


class NonPositiveQuantity(RegtangError):
    """Log-log regression received a non-positive sample."""


# --- cycle errors -------------------------------------------------------------

class NoBracket(RegtangError):
    """The return-map displacement does not change sign on the bracket."""


class NotConverged(RegtangError):
    """Fixed-point iteration exceeded its iteration budget."""


class MaxRevolutions(RegtangError):
    """The return map exceeded its revolution budget without closing."""
