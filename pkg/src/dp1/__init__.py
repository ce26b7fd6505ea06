"""Certified solver and verification toolkit for the difference equation

    ell(n) = x_n * (sigma(n,+1) x_{n+1} + sigma(n,0) x_n + sigma(n,-1) x_{n-1})
             + kappa(n) x_n,        n >= 1,

with initial data x_0 real and x_1 > 0.  The package locates the unique
initial slope x_1* whose forward trajectory stays positive, verifies
uniqueness hypotheses, checks scaled-limit behaviour, and cross-validates
the quartic-exponential family against independent quadrature.
"""

from .errors import (
    ConfigError,
    ConvergenceError,
    DivisionByZero,
    DomainError,
    DomainExceeded,
    DP1Error,
    EscalationExhausted,
    InconsistentClassification,
    InvalidParameter,
    NegativeOperand,
    NoClosedForm,
    NoConvergence,
    NotApplicable,
    ParseError,
    SigmaRightZero,
    TooShort,
)
from .precision import RealP, make_real, one_ulp, sqrt_p

__version__ = "0.1.0"
