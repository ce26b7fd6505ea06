"""Coefficient families for the difference equation

    ell(n) = x_n * (sigma(n,+1) x_{n+1} + sigma(n,0) x_n + sigma(n,-1) x_{n-1})
             + kappa(n) x_n,        n >= 1.

A family packages the four coefficient sequences behind one interface:

    ell(n, prec)        right-hand side, required > 0 for every n
    sigma(n, j, prec)   interaction weights, j in {-1, 0, +1}, >= 0
    kappa(n, prec)      linear term, any sign
    sigma_max(n, prec)  max of the two side weights, used by the
                        uniqueness conditions

Closed-form kinds evaluate on demand at any requested precision, so
re-evaluating at higher precision agrees with the lower-precision value
to the lower precision's last place.  The tabulated kind stores decimal
strings and re-parses them per precision for the same reason: nothing is
ever cached in a fixed binary width.

Parameters arrive as decimal strings (or ints).  Certificate decisions
(the structural "holds for every n" facts used by the uniqueness module)
are made on exact rationals derived from those strings, never on rounded
values.

The standing positivity assumptions are ell(n) > 0 and sigma(n,0) > 0
with sigma(n,+-1) >= 0.  One deliberate exception ships in the box:
``MiddleOnlyExample`` has sigma(n,0) == 0, which genuinely breaks
uniqueness (a one-parameter family of positive solutions exists).  It is
kept as a boundary case for the verification suite and is documented as
such wherever it matters.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from typing import Optional

from .errors import DomainExceeded, InvalidParameter, NoClosedForm, ParseError
from .precision import RealP, make_real, pow_p, sqrt_p

_SIDE_JS = (-1, 0, 1)

TABLE_COLUMNS = ("n", "ell", "sigma_p1", "sigma_0", "sigma_m1", "kappa")


def _fraction(text: str | int, what: str) -> Fraction:
    """Exact rational value of a decimal string; used for certificates."""
    try:
        return Fraction(Decimal(str(text).strip()))
    except (InvalidOperation, ValueError) as exc:
        raise ParseError(f"{what} is not a decimal number: {text!r}") from exc


def _check_n(n: int) -> None:
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise InvalidParameter(f"coefficient index must be an int >= 1, got {n!r}")


def _check_j(j: int) -> None:
    if j not in _SIDE_JS:
        raise InvalidParameter(f"sigma offset must be -1, 0 or +1, got {j!r}")


class CoefficientFamily:
    """Common interface; concrete kinds subclass this."""

    #: True when both side weights are strictly positive for every n.
    strict_side: bool = True
    #: Largest index covered, or None for unbounded closed forms.
    max_index: Optional[int] = None

    def check_index(self, n: int) -> None:
        _check_n(n)
        if self.max_index is not None and n > self.max_index:
            raise DomainExceeded(
                f"index {n} beyond tabulated range 1..{self.max_index}"
            )

    def ell(self, n: int, prec: int) -> RealP:
        raise NotImplementedError

    def sigma(self, n: int, j: int, prec: int) -> RealP:
        raise NotImplementedError

    def kappa(self, n: int, prec: int) -> RealP:
        raise NotImplementedError

    def sigma_max(self, n: int, prec: int) -> RealP:
        """Exact max of the two side weights, at the requested precision."""
        lo = self.sigma(n, -1, prec)
        hi = self.sigma(n, 1, prec)
        return hi if hi >= lo else lo

    def family_id(self) -> str:
        raise NotImplementedError

    # -- closed-form hooks; the default is "none available" ----------------

    def limit_data(self, prec: int) -> tuple[RealP, RealP, RealP, RealP]:
        """(p_plus, sigma0, p_minus, q) limits of the scaled equation."""
        raise NoClosedForm(f"{self.family_id()} has no closed-form limit data")

    def partition_certificate(self) -> Optional[str]:
        """Reason the star/dagger conditions hold for every n, or None."""
        return None

    def liminf_certificate(self) -> Optional[str]:
        """Reason the normalized-growth liminf is zero, or None."""
        return None


@dataclass(frozen=True)
class FreudQuartic(CoefficientFamily):
    """ell(n) = n + rho * (1 - (-1)^n) / 2,  sigma(n,j) = c,  kappa(n) = K.

    The coefficient family of orthogonal polynomials for the weight
    |x|^rho * exp(-(c/4) x^4 - (K/2) x^2); the odd indices carry the
    rho shift.  Requires c > 0 and rho > -1.
    """

    c: str = "1"
    K: str = "0"
    rho: str = "0"

    def __post_init__(self):
        c = _fraction(self.c, "c")
        _fraction(self.K, "K")
        rho = _fraction(self.rho, "rho")
        if c <= 0:
            raise InvalidParameter(f"c must be > 0, got {self.c!r}")
        if rho <= -1:
            raise InvalidParameter(f"rho must be > -1, got {self.rho!r}")

    def ell(self, n: int, prec: int) -> RealP:
        self.check_index(n)
        base = make_real(n, prec)
        if n % 2 == 1:
            return base + make_real(self.rho, prec)
        return base

    def sigma(self, n: int, j: int, prec: int) -> RealP:
        self.check_index(n)
        _check_j(j)
        return make_real(self.c, prec)

    def kappa(self, n: int, prec: int) -> RealP:
        self.check_index(n)
        return make_real(self.K, prec)

    def family_id(self) -> str:
        return f"freud(c={self.c},K={self.K},rho={self.rho})"

    def limit_data(self, prec: int) -> tuple[RealP, RealP, RealP, RealP]:
        # sqrt(ell(n+-1)/ell(n)) -> 1 since ell grows linearly, so both
        # side limits collapse to c; kappa is constant against sqrt(ell).
        c = make_real(self.c, prec)
        return c, c, c, make_real(0, prec)

    def partition_certificate(self) -> Optional[str]:
        if _fraction(self.K, "K") >= 0:
            return (
                "dagger at every n: sigma_max == sigma_0 == c makes the "
                "slack term vanish, and kappa == K >= 0"
            )
        return None

    def liminf_certificate(self) -> Optional[str]:
        return (
            "ell grows linearly while sigma_0 is the constant c, and the "
            "negative part of kappa is bounded, so the normalized growth "
            "expression decays like 1/n"
        )


@dataclass(frozen=True)
class PowerFormula:
    """coeff * n**exponent with decimal-string fields, exponent >= 0."""

    coeff: str
    exponent: str = "0"

    def __post_init__(self):
        _fraction(self.coeff, "coeff")
        if _fraction(self.exponent, "exponent") < 0:
            raise InvalidParameter(f"exponent must be >= 0, got {self.exponent!r}")

    @property
    def coeff_exact(self) -> Fraction:
        return _fraction(self.coeff, "coeff")

    @property
    def exponent_exact(self) -> Fraction:
        return _fraction(self.exponent, "exponent")

    def is_constant(self) -> bool:
        return self.coeff_exact == 0 or self.exponent_exact == 0

    def degree(self) -> Optional[Fraction]:
        """Growth degree, or None for the zero sequence."""
        if self.coeff_exact == 0:
            return None
        return self.exponent_exact

    def eval(self, n: int, prec: int) -> RealP:
        coeff = make_real(self.coeff, prec)
        e = self.exponent_exact
        if coeff.is_zero() or e == 0:
            return coeff
        if e.denominator == 1:
            return coeff * make_real(n ** e.numerator, prec)
        return coeff * pow_p(make_real(n, prec), make_real(self.exponent, prec))


def _formula(value: "PowerFormula | str | int") -> PowerFormula:
    if isinstance(value, PowerFormula):
        return value
    return PowerFormula(coeff=str(value))


@dataclass(frozen=True)
class GeneralClosedForm(CoefficientFamily):
    """Each coefficient sequence is coeff * n**exponent.

    Covers constant-weight families beyond the quartic line (for example
    sigma sides 1/4 with middle 1, or a linearly growing kappa) without
    tabulating anything.  Plain strings are accepted per slot as a
    shorthand for constants.
    """

    ell_f: PowerFormula
    sigma_p1_f: PowerFormula
    sigma_0_f: PowerFormula
    sigma_m1_f: PowerFormula
    kappa_f: PowerFormula
    label: str = ""

    def __init__(self, ell, sigma_p1, sigma_0, sigma_m1, kappa, label=""):
        object.__setattr__(self, "ell_f", _formula(ell))
        object.__setattr__(self, "sigma_p1_f", _formula(sigma_p1))
        object.__setattr__(self, "sigma_0_f", _formula(sigma_0))
        object.__setattr__(self, "sigma_m1_f", _formula(sigma_m1))
        object.__setattr__(self, "kappa_f", _formula(kappa))
        object.__setattr__(self, "label", label)
        if self.ell_f.coeff_exact <= 0:
            raise InvalidParameter("ell coefficient must be > 0")
        if self.sigma_0_f.coeff_exact <= 0:
            raise InvalidParameter("sigma_0 coefficient must be > 0")
        if self.sigma_p1_f.coeff_exact < 0 or self.sigma_m1_f.coeff_exact < 0:
            raise InvalidParameter("side sigma coefficients must be >= 0")
        object.__setattr__(
            self,
            "strict_side",
            self.sigma_p1_f.coeff_exact > 0 and self.sigma_m1_f.coeff_exact > 0,
        )

    def ell(self, n: int, prec: int) -> RealP:
        self.check_index(n)
        return self.ell_f.eval(n, prec)

    def sigma(self, n: int, j: int, prec: int) -> RealP:
        self.check_index(n)
        _check_j(j)
        f = {1: self.sigma_p1_f, 0: self.sigma_0_f, -1: self.sigma_m1_f}[j]
        return f.eval(n, prec)

    def kappa(self, n: int, prec: int) -> RealP:
        self.check_index(n)
        return self.kappa_f.eval(n, prec)

    def family_id(self) -> str:
        if self.label:
            return f"closed-form({self.label})"
        parts = ",".join(
            f"{name}={f.coeff}*n^{f.exponent}"
            for name, f in (
                ("ell", self.ell_f),
                ("sp1", self.sigma_p1_f),
                ("s0", self.sigma_0_f),
                ("sm1", self.sigma_m1_f),
                ("kappa", self.kappa_f),
            )
        )
        return f"closed-form({parts})"

    def limit_data(self, prec: int) -> tuple[RealP, RealP, RealP, RealP]:
        for name, f in (
            ("sigma_p1", self.sigma_p1_f),
            ("sigma_0", self.sigma_0_f),
            ("sigma_m1", self.sigma_m1_f),
        ):
            if not f.is_constant():
                raise NoClosedForm(f"{name} is not constant; no finite limit")
        # sqrt(ell(n+-1)/ell(n)) -> 1 for any power-law ell, so the side
        # limits are the constant sigmas.  q = lim kappa/sqrt(ell) is
        # finite only when kappa grows no faster than sqrt(ell).
        dk = self.kappa_f.degree()
        dl = self.ell_f.degree()
        if dk is None or dk < dl / 2:
            q = make_real(0, prec)
        elif dk == dl / 2:
            q = make_real(self.kappa_f.coeff, prec) / sqrt_p(
                make_real(self.ell_f.coeff, prec)
            )
        else:
            raise NoClosedForm("kappa grows faster than sqrt(ell); no finite limit")
        return (
            self.sigma_p1_f.eval(1, prec),
            self.sigma_0_f.eval(1, prec),
            self.sigma_m1_f.eval(1, prec),
            q,
        )

    def partition_certificate(self) -> Optional[str]:
        if not (
            self.sigma_p1_f.is_constant()
            and self.sigma_0_f.is_constant()
            and self.sigma_m1_f.is_constant()
        ):
            return None
        s = max(self.sigma_p1_f.coeff_exact, self.sigma_m1_f.coeff_exact)
        s0 = self.sigma_0_f.coeff_exact
        if 2 * s <= s0:
            return "star at every n: 2 * sigma_max <= sigma_0 with constant sigmas"
        if not (s <= s0 < 2 * s):
            return None
        kc = self.kappa_f.coeff_exact
        if kc >= 0:
            return "dagger at every n: constant sigmas and kappa >= 0"
        # kappa < 0: need |kappa| sqrt(2 sigma_max - sigma_0) <= 2 (sigma_0 -
        # sigma_max) sqrt(ell) for every n.  With power-law growth it is
        # enough that the kappa degree stays at or below half the ell degree
        # and the squared coefficient inequality holds.
        dk = self.kappa_f.degree()
        dl = self.ell_f.degree() if self.ell_f.degree() is not None else Fraction(0)
        if dk is not None and dk > dl / 2:
            return None
        lhs = kc * kc * (2 * s - s0)
        rhs = 4 * (s0 - s) ** 2 * self.ell_f.coeff_exact
        if lhs <= rhs:
            return (
                "dagger at every n: constant sigmas; the squared slack "
                "inequality holds uniformly because kappa grows no faster "
                "than sqrt(ell)"
            )
        return None

    def liminf_certificate(self) -> Optional[str]:
        d0 = self.sigma_0_f.degree()
        if d0 is None:
            return None
        dl = self.ell_f.degree()
        if dl is None:
            dl = Fraction(0)
        if dl - d0 >= 2:
            return None
        kc = self.kappa_f.coeff_exact
        if kc < 0:
            dk = self.kappa_f.degree()
            if dk is not None and 2 * (dk - d0) >= 2:
                return None
        return (
            "power-law growth: ell/sigma_0 and (kappa_-/sigma_0)^2 are both "
            "o(n^2), so the normalized growth expression has liminf zero"
        )


@dataclass(frozen=True)
class SqrtNExample(CoefficientFamily):
    """Family whose exact positive solution is x_n = sqrt(n).

    ell(n) = 3n; sigma(1,+1) = sqrt(2), sigma(1,0) = 1, sigma(1,-1) = 0;
    for n >= 2, sigma(n,+1) = sqrt(n/(n+1)), sigma(n,0) = 1,
    sigma(n,-1) = sqrt(n/(n-1)); kappa = 0.  Each weighted side product
    sigma(n,+-1) * sqrt(n+-1) collapses to sqrt(n), so the equation reads
    3n = sqrt(n) * 3 sqrt(n).  The n = 1 row uses x_0 = 0, which is why
    its left weight may be zero.
    """

    def __post_init__(self):
        object.__setattr__(self, "strict_side", False)

    def ell(self, n: int, prec: int) -> RealP:
        self.check_index(n)
        return make_real(3 * n, prec)

    def sigma(self, n: int, j: int, prec: int) -> RealP:
        self.check_index(n)
        _check_j(j)
        if j == 0:
            return make_real(1, prec)
        if j == 1:
            if n == 1:
                return sqrt_p(make_real(2, prec))
            return sqrt_p(make_real(n, prec) / make_real(n + 1, prec))
        if n == 1:
            return make_real(0, prec)
        return sqrt_p(make_real(n, prec) / make_real(n - 1, prec))

    def kappa(self, n: int, prec: int) -> RealP:
        self.check_index(n)
        return make_real(0, prec)

    def family_id(self) -> str:
        return "sqrtn"

    def limit_data(self, prec: int) -> tuple[RealP, RealP, RealP, RealP]:
        # sigma(n,+-1) * sqrt(ell(n+-1)/ell(n)) == 1 exactly at every n,
        # so the limits are exact ones.
        one = make_real(1, prec)
        return one, one, one, make_real(0, prec)

    def liminf_certificate(self) -> Optional[str]:
        return (
            "ell/(n^2 sigma_0) = 3/n -> 0 and kappa == 0, so the "
            "normalized growth expression has liminf zero"
        )


@dataclass(frozen=True)
class MiddleOnlyExample(CoefficientFamily):
    """ell = 1, sigma sides = 1, sigma middle = 0, kappa = 0.

    Deliberately outside the standing assumption sigma(n,0) > 0: the
    equation 1 = x_n (x_{n+1} + x_{n-1}) has a one-parameter family of
    positive solutions (the pair products y_n = x_{n-1} x_n satisfy
    y_{n+1} + y_n = 1, so any product split in (0,1) works).  Kept as a
    degenerate boundary case; the uniqueness checks report Neither on it
    and no certificate exists.
    """

    def ell(self, n: int, prec: int) -> RealP:
        self.check_index(n)
        return make_real(1, prec)

    def sigma(self, n: int, j: int, prec: int) -> RealP:
        self.check_index(n)
        _check_j(j)
        return make_real(0 if j == 0 else 1, prec)

    def kappa(self, n: int, prec: int) -> RealP:
        self.check_index(n)
        return make_real(0, prec)

    def family_id(self) -> str:
        return "middle-only"


class Tabulated(CoefficientFamily):
    """Coefficients supplied row-by-row as decimal strings.

    Rows cover n = 1..N contiguously.  Values stay strings internally and
    are re-parsed at every requested precision, so a table written at one
    precision serves any other without double rounding.
    """

    def __init__(self, rows: "list[dict[str, str]] | tuple", source: str = "table"):
        norm: list[tuple[str, str, str, str, str]] = []
        for i, row in enumerate(rows, start=1):
            if isinstance(row, dict):
                missing = [c for c in TABLE_COLUMNS if c not in row]
                if missing:
                    raise InvalidParameter(f"row {i} missing columns {missing}")
                n_val = int(row["n"])
                vals = tuple(
                    str(row[c]).strip()
                    for c in ("ell", "sigma_p1", "sigma_0", "sigma_m1", "kappa")
                )
            else:
                n_val, *rest = row
                n_val = int(n_val)
                if len(rest) != 5:
                    raise InvalidParameter(f"row {i} needs 6 entries, got {len(rest) + 1}")
                vals = tuple(str(v).strip() for v in rest)
            if n_val != i:
                raise InvalidParameter(f"rows must cover n = 1..N in order; row {i} has n = {n_val}")
            if _fraction(vals[0], "ell") <= 0:
                raise InvalidParameter(f"ell must be > 0 at n = {i}, got {vals[0]!r}")
            for name, v in zip(("sigma_p1", "sigma_0", "sigma_m1"), vals[1:4]):
                if _fraction(v, name) < 0:
                    raise InvalidParameter(f"{name} must be >= 0 at n = {i}, got {v!r}")
            _fraction(vals[4], "kappa")
            norm.append(vals)
        if not norm:
            raise InvalidParameter("table has no rows")
        self._rows = tuple(norm)
        self._source = source
        self.max_index = len(norm)
        self.strict_side = all(
            _fraction(r[1], "sigma_p1") > 0 and _fraction(r[3], "sigma_m1") > 0
            for r in self._rows
        )

    @classmethod
    def from_csv(cls, path: str) -> "Tabulated":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise InvalidParameter(f"{path}: empty file") from None
            if tuple(h.strip() for h in header) != TABLE_COLUMNS:
                raise InvalidParameter(
                    f"{path}: header must be {','.join(TABLE_COLUMNS)}"
                )
            rows = []
            for line in reader:
                if not line or all(not c.strip() for c in line):
                    continue
                if len(line) != 6:
                    raise InvalidParameter(f"{path}: row needs 6 columns: {line!r}")
                rows.append(tuple(c.strip() for c in line))
        return cls(rows, source=path)

    def _row(self, n: int) -> tuple[str, str, str, str, str]:
        self.check_index(n)
        return self._rows[n - 1]

    def ell(self, n: int, prec: int) -> RealP:
        return make_real(self._row(n)[0], prec)

    def sigma(self, n: int, j: int, prec: int) -> RealP:
        _check_j(j)
        row = self._row(n)
        return make_real(row[{1: 1, 0: 2, -1: 3}[j]], prec)

    def kappa(self, n: int, prec: int) -> RealP:
        return make_real(self._row(n)[4], prec)

    def family_id(self) -> str:
        return f"tabulated({self._source},N={self.max_index})"
