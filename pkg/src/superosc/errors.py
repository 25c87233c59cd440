"""Exception hierarchy shared by all modules."""


class SuperoscError(Exception):
    """Base class for library errors."""


class DomainError(SuperoscError, ValueError):
    """Input outside the domain where a formula is defined."""


class PrecisionViolation(DomainError):
    """The requested precision policy cannot deliver the contracted accuracy."""


class BudgetExceeded(DomainError):
    """A brute-force enumeration would exceed its declared budget."""


class ConvergenceError(DomainError):
    """A quadrature or series truncation did not reach its tolerance."""


class VerificationFailure(SuperoscError):
    """A verification check did not pass."""
