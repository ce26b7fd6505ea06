"""Exception hierarchy.

Errors are grouped by how the command-line front end maps them to exit
codes: configuration problems exit 1, domain violations exit 2, and
convergence failures exit 3.  Library code raises these directly; the
groups are the contract, the leaf classes carry the detail.
"""


class DP1Error(Exception):
    """Base class for every error raised by this package."""


class ConfigError(DP1Error):
    """Malformed run configuration: unknown keys, unreadable files, bad enums."""


class DomainError(DP1Error):
    """Input outside the mathematical domain of an operation."""


class ParseError(DomainError):
    """A decimal string could not be parsed as a finite real number."""


class NegativeOperand(DomainError):
    """Square root (or logarithm) of a value outside its domain."""


class InvalidParameter(DomainError):
    """Family or operation parameter outside its admissible range."""


class DomainExceeded(DomainError):
    """Index beyond the range covered by a tabulated family."""


class SigmaRightZero(DomainError):
    """Forward step impossible: the coefficient multiplying x_{n+1} is zero."""


class DivisionByZero(DomainError):
    """Division by an exactly-zero value."""


class TooShort(DomainError):
    """The trajectory or sequence window has too few points for the operation."""


class NotApplicable(DomainError):
    """Classification attempted where the bracketing construction breaks down."""


class NoClosedForm(DomainError):
    """Closed-form limit data requested from a family that cannot supply it."""


class ConvergenceError(DP1Error):
    """Base class for solver and quadrature non-convergence."""


class NoConvergence(ConvergenceError):
    """Iterative refinement stopped improving before reaching the tolerance."""


class EscalationExhausted(ConvergenceError):
    """Escalation budget spent before the result could be certified."""


class InconsistentClassification(ConvergenceError):
    """A bracket endpoint classified on the wrong side.

    Used internally as an escalation trigger; it becomes fatal only when
    the escalation budget is exhausted.
    """
