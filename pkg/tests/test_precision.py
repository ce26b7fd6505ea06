"""Arithmetic-core invariants: parse/round-trip, rounding discipline,
exact comparisons, and the error taxonomy for partial operations."""

import random
from fractions import Fraction

import pytest

from dp1.errors import (
    DivisionByZero,
    InvalidParameter,
    NegativeOperand,
    ParseError,
)
from dp1.precision import (
    MIN_PRECISION,
    RealP,
    decimal_digit_count,
    gamma_p,
    log_p,
    make_real,
    one_ulp,
    pi_p,
    pow_p,
    sqrt_p,
    zero,
)


def test_construction_accepts_strings_and_ints():
    assert make_real("1.25", 64) == make_real(5, 64) / 4
    assert make_real("  -3e2 ", 64) == -300
    assert make_real(0, 53).is_zero()


def test_construction_rejects_floats_bools_nonfinite():
    with pytest.raises(ParseError):
        RealP(1.5, 64)
    with pytest.raises(ParseError):
        RealP(True, 64)
    with pytest.raises(ParseError):
        RealP("nan", 64)
    with pytest.raises(ParseError):
        RealP("inf", 64)
    with pytest.raises(ParseError):
        RealP("12,5", 64)


def test_minimum_precision_enforced():
    with pytest.raises(InvalidParameter):
        RealP("1", MIN_PRECISION - 1)
    assert make_real("1", MIN_PRECISION).prec == MIN_PRECISION


def test_decimal_round_trip_is_exact():
    # to_decimal must reparse to the identical value at the same precision
    rng = random.Random(0x5EED1)
    for _ in range(300):
        prec = rng.choice((53, 64, 113, 128, 192, 256, 511))
        mantissa = rng.randint(-(10**20), 10**20)
        if mantissa == 0:
            continue
        exp = rng.randint(-30, 30)
        x = make_real(f"{mantissa}e{exp}", prec)
        back = make_real(x.to_decimal(), prec)
        assert back == x, (mantissa, exp, prec)


def test_decimal_digit_count_covers_precision():
    for prec in (53, 64, 128, 1024):
        assert decimal_digit_count(prec) >= prec * 0.301 + 2


def test_zero_serializes_plainly():
    assert zero(128).to_decimal() == "0"
    assert make_real("0", 64).to_decimal() == "0"


def test_results_carry_min_operand_precision():
    x = make_real("0.1", 256)
    y = make_real("3", 64)
    assert (x * y).prec == 64
    assert (y * x).prec == 64
    assert (x + 1).prec == 256  # int coerces at the partner's precision


def test_dyadic_arithmetic_is_exact():
    rng = random.Random(0x5EED2)
    for _ in range(200):
        prec = rng.choice((64, 128, 256))
        a = Fraction(rng.randint(-(2**40), 2**40), 2 ** rng.randint(0, 10))
        b = Fraction(rng.randint(-(2**40), 2**40), 2 ** rng.randint(0, 10))
        xa = make_real(str(a.numerator), prec) / a.denominator
        xb = make_real(str(b.numerator), prec) / b.denominator
        s = xa + xb
        m, e = s.as_mantissa_exp()
        assert Fraction(m) * Fraction(2) ** e == a + b


def test_single_rounding_against_exact_rational():
    # one rounding at min precision: sum differs from the exact rational
    # by at most one ulp of the result
    rng = random.Random(0x5EED3)
    for _ in range(100):
        prec = rng.choice((53, 64, 128))
        fa = Fraction(rng.randint(1, 10**12), rng.randint(1, 10**12))
        fb = Fraction(rng.randint(1, 10**12), rng.randint(1, 10**12))
        xa = make_real(str(fa.numerator), prec) / fa.denominator
        xb = make_real(str(fb.numerator), prec) / fb.denominator
        s = xa + xb
        sm, se = s.as_mantissa_exp()
        am, ae = xa.as_mantissa_exp()
        bm, be = xb.as_mantissa_exp()
        exact = Fraction(am) * Fraction(2) ** ae + Fraction(bm) * Fraction(2) ** be
        um, ue = one_ulp(s).as_mantissa_exp()
        assert abs(Fraction(sm) * Fraction(2) ** se - exact) <= Fraction(um) * Fraction(2) ** ue


def test_comparisons_are_exact_across_precisions():
    assert make_real("1", 64) == make_real("1", 256)
    third64 = make_real(1, 64) / 3
    third256 = make_real(1, 256) / 3
    assert third64 != third256
    assert third64 > third256  # 1/3 rounds up at 64 bits
    assert make_real("2", 64) < 3
    assert hash(make_real("7", 64)) == hash(make_real("7", 512))


def test_widening_is_exact_and_value_preserving():
    x = make_real(1, 64) / 3
    wide = x.with_precision(256)
    assert wide.prec == 256
    assert wide == x


def test_division_by_exact_zero_raises():
    with pytest.raises(DivisionByZero):
        make_real(1, 64) / zero(64)
    with pytest.raises(DivisionByZero):
        1 / zero(64)


def test_partial_functions_raise_typed_errors():
    with pytest.raises(NegativeOperand):
        sqrt_p(make_real(-1, 64))
    with pytest.raises(NegativeOperand):
        log_p(zero(64))
    with pytest.raises(InvalidParameter):
        gamma_p(zero(64))
    with pytest.raises(InvalidParameter):
        gamma_p(make_real(-2, 64))
    with pytest.raises(InvalidParameter):
        one_ulp(zero(64))


def test_one_ulp_matches_binade_spacing():
    m, e = one_ulp(make_real(1, 64)).as_mantissa_exp()
    assert Fraction(m) * Fraction(2) ** e == Fraction(1, 2**63)
    m, e = one_ulp(make_real(1024, 53)).as_mantissa_exp()
    assert Fraction(m) * Fraction(2) ** e == Fraction(1024, 2**52)
    # same binade, same ulp
    assert one_ulp(make_real("1.5", 64)) == one_ulp(make_real("1.9", 64))


def test_reference_constants():
    # references computed with mpmath at 60 dps
    sqrt2 = "1.4142135623730950488016887242096980785696718753769"
    pi50 = "3.1415926535897932384626433832795028841971693993751"
    assert abs(sqrt_p(make_real(2, 192)) - make_real(sqrt2, 192)) < make_real("1e-48", 64)
    assert abs(pi_p(192) - make_real(pi50, 192)) < make_real("1e-48", 64)
    # Gamma(1/2)^2 == pi
    gh = gamma_p(make_real("0.5", 192))
    assert abs(gh * gh - pi_p(192)) < make_real("1e-55", 64)


def test_pow_p_edges():
    assert pow_p(make_real(2, 128), make_real("0.5", 128)) == sqrt_p(make_real(2, 128))
    assert pow_p(zero(128), make_real(2, 128)).is_zero()
    with pytest.raises(NegativeOperand):
        pow_p(make_real(-2, 128), make_real("0.5", 128))
    with pytest.raises(DivisionByZero):
        pow_p(zero(128), make_real(-1, 128))


def test_float_export_and_repr():
    x = make_real("0.67597824006728472899544768467", 128)
    assert abs(float(x) - 0.6759782400672847) < 1e-15
    assert "RealP" in repr(x)
