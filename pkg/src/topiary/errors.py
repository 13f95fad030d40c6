"""Exception hierarchy for the topiary package.

Exceptions are grouped by how an executable should exit: invalid input (2),
numerical failure (3), non-convergence (4), internal invariant breach (5).
The CLI maps ``exit_code`` directly; library callers can catch the family
base classes.
"""


class TopiaryError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class InvalidInput(TopiaryError):
    """Caller-supplied data or parameters failed validation."""

    exit_code = 2


class TooLarge(InvalidInput):
    """Problem exceeds an enumeration cap (oracle 12 points, deconstruct 16)."""


class NotAnIndex(InvalidInput):
    """A set claimed to be a topiaric index has a nonzero margin on itself."""


class TOutOfRange(InvalidInput):
    """Convex combination parameter outside [0, 1]."""


class EmptyMask(InvalidInput):
    """Maze mask has no obstacle cells."""


class TooFewRows(InvalidInput):
    """Returns table needs at least two rows for a sample covariance."""


class RaggedRow(InvalidInput):
    """Returns table row length does not match the header."""


class NonNumericCell(InvalidInput):
    """Returns table cell failed to parse as a number."""


class UnknownReferencePoint(InvalidInput):
    """Adaptive-objective reference measure names a point outside the ground set."""


class RequiresOracle(InvalidInput):
    """Convergence summary needs an oracle objective to compute gaps."""


class BaseNotInIndex(InvalidInput):
    """Slope-report base point is not in the topiaric index of the solution."""


class KernelNotAnalytic(InvalidInput):
    """Harmonic-conjugate field only exists for analytic kernels (fock, hardy)."""


class StartInsideObstacle(InvalidInput):
    """Path trace started inside an obstacle cell; the trichotomy branch
    should have produced a point mass instead."""


class NumericalError(TopiaryError):
    """Numerical failure: the computation is well-posed but this instance
    resists it (singular system, non-PSD input, overflow guard)."""

    exit_code = 3


class NonPSD(NumericalError):
    """Gram/covariance matrix has an eigenvalue below -psd_tol * max diagonal."""

    def __init__(self, message, eigenvalue=None):
        super().__init__(message)
        self.eigenvalue = eigenvalue


class NotPrunable(NumericalError):
    """Augmented hedge system is singular; the set has no hedge."""


class DomainError(NumericalError):
    """Point outside the kernel domain (Hardy |z| >= 1, Fock overflow guard)."""


class DegenerateDirection(NumericalError):
    """Greedy step has a positive margin but a zero-length step direction.

    Means two candidates share an embedding while one strictly dominates in
    psi, which deduplication should have removed; the Gram input is
    inconsistent and is reported, not papered over.
    """


class NoProgress(NumericalError):
    """Exchange step size collapsed to zero before the margin closed."""


class AccessibilityFailure(NumericalError):
    """No single-point deletion of a topiaric index is again an index within
    tolerance. Theory guarantees one exists, so this signals tolerance
    trouble; the margin evidence rides along in the message."""


class ZeroPortfolio(NumericalError):
    """Optimal measure embeds to zero; beta and alpha are undefined."""


class ConvergenceError(TopiaryError):
    """Solver ran out of budget. Carries whatever state was reached."""

    exit_code = 4

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class MaxIterExceeded(ConvergenceError):
    """Iteration cap reached before the score dropped under margin_tol."""


class CycleDetected(ConvergenceError):
    """Exchange revisited a (support, objective) pair; aborted to avoid a
    ko fight."""


class InvariantViolation(TopiaryError):
    """An internal mathematical invariant failed. Always a bug."""

    exit_code = 5


class MonotonicityError(InvariantViolation):
    """Objective decreased along a solver trajectory."""


class DuplicatePointsWarning(UserWarning):
    """Two ground-set points have identical Gram rows."""


class AtomRescueWarning(UserWarning):
    """drop_small_atoms refused to empty a measure; returned it unchanged."""


def exit_code_for(exc):
    """Map an exception to a process exit code."""
    if isinstance(exc, TopiaryError):
        return exc.exit_code
    return 1
