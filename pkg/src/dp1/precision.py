"""Fixed-precision real arithmetic with explicit per-value precision.

``RealP`` wraps an MPFR floating-point value together with the precision
in bits it was created at.  Every arithmetic operation rounds exactly
once, to the minimum precision of its operands, in round-to-nearest-even.
A computation is therefore a deterministic function of its inputs and
their precisions: identical inputs at identical precisions give
bit-identical results, on any platform, in any thread.

Design rules the rest of the package leans on:

* Values are immutable and freely shareable across threads.
* Comparisons are exact on the stored representation.  Nothing is
  re-rounded on the way into a comparison.
* Python ``float`` operands are rejected.  A float smuggles in a silent
  53-bit rounding that would defeat the precision-escalation logic, so
  numeric input crosses the boundary as decimal strings or ints only.
* Decimal serialization uses ceil(P * log10(2)) + 2 significant digits,
  enough that parse(to_decimal(x)) == x at the same precision.

The scalar kernels beyond the ring operations (sqrt, exp, log, pow,
Gamma, the hyperbolics, pi) live here so every module draws them from
one place.  MPFR computes all of them correctly rounded, far inside the
4-ulp envelope the rest of the package assumes.
"""

from __future__ import annotations

import math
from typing import Union

import gmpy2

from .errors import DivisionByZero, InvalidParameter, NegativeOperand, ParseError

MIN_PRECISION = 53

_CONTEXTS: dict[int, "gmpy2.context"] = {}


def _ctx(prec: int) -> "gmpy2.context":
    ctx = _CONTEXTS.get(prec)
    if ctx is None:
        ctx = gmpy2.context(precision=prec)
        _CONTEXTS[prec] = ctx
    return ctx


def decimal_digit_count(prec: int) -> int:
    """Significant decimal digits used when serializing a P-bit value."""
    return math.ceil(prec * math.log10(2)) + 2


def _check_precision(prec: int) -> None:
    if not isinstance(prec, int) or isinstance(prec, bool):
        raise InvalidParameter(f"precision must be an int, got {type(prec).__name__}")
    if prec < MIN_PRECISION:
        raise InvalidParameter(f"precision must be >= {MIN_PRECISION} bits, got {prec}")


class RealP:
    """A finite real value carrying its creation precision in bits."""

    __slots__ = ("_v", "_prec")

    def __init__(self, value: Union[str, int], prec: int):
        _check_precision(prec)
        if isinstance(value, bool) or not isinstance(value, (str, int)):
            raise ParseError(
                f"RealP takes a decimal string or int, got {type(value).__name__}"
            )
        if isinstance(value, str):
            try:
                v = gmpy2.mpfr(value.strip(), prec)
            except ValueError as exc:
                raise ParseError(f"not a decimal number: {value!r}") from exc
        else:
            v = gmpy2.mpfr(value, prec)
        if not gmpy2.is_finite(v):
            raise ParseError(f"value is not finite: {value!r}")
        self._v = v
        self._prec = prec

    @classmethod
    def _raw(cls, v, prec: int) -> "RealP":
        out = object.__new__(cls)
        out._v = v
        out._prec = prec
        return out

    @property
    def prec(self) -> int:
        return self._prec

    def with_precision(self, prec: int) -> "RealP":
        """Re-round to another precision.  Widening is exact."""
        _check_precision(prec)
        return RealP._raw(_ctx(prec).add(self._v, gmpy2.mpfr(0)), prec)

    def to_decimal(self) -> str:
        """Decimal string that reparses to the identical value at self.prec."""
        if gmpy2.is_zero(self._v):
            return "0"
        digs, exp10, _ = self._v.digits(10, decimal_digit_count(self._prec))
        sign = ""
        if digs.startswith("-"):
            sign, digs = "-", digs[1:]
        return f"{sign}{digs[0]}.{digs[1:]}e{exp10 - 1:+03d}"

    def as_mantissa_exp(self) -> tuple[int, int]:
        """Exact dyadic decomposition: self == m * 2**e."""
        m, e = self._v.as_mantissa_exp()
        return int(m), int(e)

    def is_zero(self) -> bool:
        return bool(gmpy2.is_zero(self._v))

    def sign(self) -> int:
        return gmpy2.sign(self._v)

    # -- arithmetic: one rounding, at the minimum operand precision --------

    def _coerce(self, other) -> "RealP | None":
        if isinstance(other, RealP):
            return other
        if isinstance(other, int) and not isinstance(other, bool):
            return RealP._raw(gmpy2.mpfr(other, self._prec), self._prec)
        return None

    def _binary(self, other, opname: str):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        p = min(self._prec, o._prec)
        return RealP._raw(getattr(_ctx(p), opname)(self._v, o._v), p)

    def _rbinary(self, other, opname: str):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        p = min(self._prec, o._prec)
        return RealP._raw(getattr(_ctx(p), opname)(o._v, self._v), p)

    def __add__(self, other):
        return self._binary(other, "add")

    def __radd__(self, other):
        return self._rbinary(other, "add")

    def __sub__(self, other):
        return self._binary(other, "sub")

    def __rsub__(self, other):
        return self._rbinary(other, "sub")

    def __mul__(self, other):
        return self._binary(other, "mul")

    def __rmul__(self, other):
        return self._rbinary(other, "mul")

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if gmpy2.is_zero(o._v):
            raise DivisionByZero("division by exact zero")
        return self._binary(o, "div")

    def __rtruediv__(self, other):
        if gmpy2.is_zero(self._v):
            raise DivisionByZero("division by exact zero")
        return self._rbinary(other, "div")

    def __neg__(self):
        return RealP._raw(_ctx(self._prec).minus(self._v), self._prec)

    def __abs__(self):
        # builtin abs on the raw value would round at the thread-default
        # context precision; a sign flip at own precision is exact
        if gmpy2.sign(self._v) < 0:
            return RealP._raw(_ctx(self._prec).minus(self._v), self._prec)
        return self

    # -- comparisons: exact on the stored representation -------------------

    def _cmp_operand(self, other):
        if isinstance(other, RealP):
            return other._v
        if isinstance(other, int) and not isinstance(other, bool):
            return other
        return None

    def __eq__(self, other):
        o = self._cmp_operand(other)
        return NotImplemented if o is None else self._v == o

    def __ne__(self, other):
        o = self._cmp_operand(other)
        return NotImplemented if o is None else self._v != o

    def __lt__(self, other):
        o = self._cmp_operand(other)
        return NotImplemented if o is None else self._v < o

    def __le__(self, other):
        o = self._cmp_operand(other)
        return NotImplemented if o is None else self._v <= o

    def __gt__(self, other):
        o = self._cmp_operand(other)
        return NotImplemented if o is None else self._v > o

    def __ge__(self, other):
        o = self._cmp_operand(other)
        return NotImplemented if o is None else self._v >= o

    def __hash__(self):
        return hash(self._v)

    def __float__(self) -> float:
        return float(self._v)

    def __repr__(self) -> str:
        return f"RealP({self.to_decimal()!r}, {self._prec})"


def make_real(value: Union[str, int, RealP], prec: int) -> RealP:
    """Parse a decimal string or int at ``prec`` bits.

    A ``RealP`` argument is re-rounded to ``prec`` (exact when widening),
    so call sites can normalize mixed input uniformly.
    """
    if isinstance(value, RealP):
        return value.with_precision(prec)
    return RealP(value, prec)


def zero(prec: int) -> RealP:
    return make_real(0, prec)


def one_ulp(x: RealP) -> RealP:
    """Spacing of representable values at x's binade.  x must be nonzero."""
    if x.is_zero():
        raise InvalidParameter("ulp of zero is undefined")
    _, e = x.as_mantissa_exp()
    return RealP._raw(_ctx(x.prec).exp2(gmpy2.mpfr(e, 64)), x.prec)


def sqrt_p(x: RealP) -> RealP:
    if x.sign() < 0:
        raise NegativeOperand("sqrt of a negative value")
    return RealP._raw(_ctx(x.prec).sqrt(x._v), x.prec)


def exp_p(x: RealP) -> RealP:
    return RealP._raw(_ctx(x.prec).exp(x._v), x.prec)


def log_p(x: RealP) -> RealP:
    if x.sign() <= 0:
        raise NegativeOperand("log of a non-positive value")
    return RealP._raw(_ctx(x.prec).log(x._v), x.prec)


def gamma_p(x: RealP) -> RealP:
    if x.sign() <= 0:
        raise InvalidParameter("Gamma kernel is restricted to positive arguments")
    return RealP._raw(_ctx(x.prec).gamma(x._v), x.prec)


def pow_p(x: RealP, y: Union[RealP, int]) -> RealP:
    """x ** y for x >= 0 (x == 0 needs y > 0)."""
    if x.sign() < 0:
        raise NegativeOperand("pow kernel is restricted to non-negative bases")
    if isinstance(y, int) and not isinstance(y, bool):
        y = make_real(y, x.prec)
    if x.is_zero() and y.sign() <= 0:
        raise DivisionByZero("0 ** y with y <= 0")
    p = min(x.prec, y.prec)
    return RealP._raw(_ctx(p).pow(x._v, y._v), p)


def sinh_p(x: RealP) -> RealP:
    return RealP._raw(_ctx(x.prec).sinh(x._v), x.prec)


def cosh_p(x: RealP) -> RealP:
    return RealP._raw(_ctx(x.prec).cosh(x._v), x.prec)


def tanh_p(x: RealP) -> RealP:
    return RealP._raw(_ctx(x.prec).tanh(x._v), x.prec)


def pi_p(prec: int) -> RealP:
    _check_precision(prec)
    return RealP._raw(_ctx(prec).const_pi(), prec)
