"""Superoscillating sequences and their quantum-mechanical companions."""
from .core import (
    ErrorReport,
    QComplex,
    SuperoscSequence,
    build_generalized,
    build_prototype,
    check_superoscillation,
    coefficient,
    derivative,
    error_envelope,
    eval_product,
    eval_sum,
    multinomial_moment,
    sup_error,
    taylor_moment,
)
from .errors import (
    BudgetExceeded,
    ConvergenceError,
    DomainError,
    PrecisionViolation,
    VerificationFailure,
)
from .precision import PrecisionPolicy

__version__ = "0.1.0"
