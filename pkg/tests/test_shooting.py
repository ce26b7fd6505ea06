"""Trajectory classification, bracket construction, and the escalating
bisection solver with its certification guarantees."""

import random

import pytest

from dp1.coefficients import FreudQuartic, MiddleOnlyExample, SqrtNExample
from dp1.errors import EscalationExhausted, InvalidParameter, NotApplicable
from dp1.precision import make_real, sqrt_p
from dp1.shooting import (
    Classification,
    Outcome,
    SolvePolicy,
    classify,
    default_precision,
    initial_bracket,
    scan,
    solve,
)

GOLDEN = "0.67597824006728472899544768467080574828728345491541"


def test_classification_parity_is_enforced():
    Classification(Outcome.TOO_SMALL, 3)
    Classification(Outcome.TOO_LARGE, 2)
    with pytest.raises(InvalidParameter):
        Classification(Outcome.TOO_SMALL, 4)
    with pytest.raises(InvalidParameter):
        Classification(Outcome.TOO_LARGE, 5)
    with pytest.raises(InvalidParameter):
        Classification(Outcome.TOO_LARGE, 1)


def test_classify_hand_checks():
    fam = FreudQuartic()
    c = classify(fam, 0, "0.7", 30, 192)
    assert c.outcome is Outcome.TOO_LARGE and c.index == 6
    c = classify(fam, 0, "0.1", 30, 192)
    assert c.outcome is Outcome.TOO_SMALL and c.index == 3
    c = classify(fam, 0, GOLDEN, 30, 192)
    assert c.outcome is Outcome.SURVIVED and c.index == 30
    # six digits of the target stop surviving at depth 30
    c = classify(fam, 0, "0.675978", 30, 192)
    assert c.outcome is Outcome.TOO_SMALL and c.index == 15
    c = classify(fam, 0, "0.675978", 10, 192)
    assert c.outcome is Outcome.SURVIVED


def test_classify_rejects_nonpositive_slope():
    with pytest.raises(InvalidParameter):
        classify(FreudQuartic(), 0, 0, 10, 128)
    with pytest.raises(InvalidParameter):
        classify(FreudQuartic(), 0, "-0.5", 10, 128)


def test_initial_bracket_hand_values():
    fam = FreudQuartic()
    z = make_real(0, 128)
    lo, hi = initial_bracket(fam, z, 128)
    assert lo.is_zero() and hi == 2
    _, hi = initial_bracket(FreudQuartic(K="2"), z, 128)
    assert abs(hi - sqrt_p(make_real(2, 192))) < make_real("1e-35", 64)
    _, hi = initial_bracket(FreudQuartic(rho="2"), z, 128)
    ref = 1 + sqrt_p(make_real(3, 192))
    assert abs(hi - ref) < make_real("1e-35", 64)
    with pytest.raises(NotApplicable):
        initial_bracket(MiddleOnlyExample(), z, 128)


def test_default_precision_env(monkeypatch):
    monkeypatch.delenv("DP1_DEFAULT_PREC", raising=False)
    assert default_precision() == 128
    monkeypatch.setenv("DP1_DEFAULT_PREC", "192")
    assert default_precision() == 192
    monkeypatch.setenv("DP1_DEFAULT_PREC", "12")
    with pytest.raises(InvalidParameter):
        default_precision()


def test_policy_precision_schedule():
    pol = SolvePolicy()
    assert pol.required_precision(16) == 64 + 64
    assert pol.required_precision(100) == 64 + 400
    capped = SolvePolicy(precision=4096, prec_cap=256)
    assert capped.initial_precision() == 256


def test_solve_returns_certified_enclosure():
    fam = FreudQuartic()
    res = solve(fam, 0, "1e-10")
    ref = make_real(GOLDEN, 320)
    assert res.bracket.lo < ref < res.bracket.hi
    assert abs(res.x1_star - ref) < make_real("1e-10", 64)
    assert res.relative_width < make_real("1e-10", 64)
    assert res.bracket.precision_bits == res.p_used
    assert res.bracket.depth_N >= 1
    assert res.classifications > 0
    # the escalation journal records how N and P moved
    assert any(e.startswith("N:") for e in res.escalations)


def test_solve_is_bit_deterministic():
    fam = FreudQuartic(K="-1")
    a = solve(fam, 0, "1e-12")
    b = solve(fam, 0, "1e-12")
    assert a.x1_star == b.x1_star
    assert a.bracket.lo == b.bracket.lo and a.bracket.hi == b.bracket.hi
    assert a.escalations == b.escalations


def test_solve_tightens_with_tolerance():
    fam = FreudQuartic()
    wide = solve(fam, 0, "1e-8")
    tight = solve(fam, 0, "1e-20")
    width_wide = wide.bracket.hi - wide.bracket.lo
    width_tight = tight.bracket.hi - tight.bracket.lo
    assert width_tight < width_wide
    assert tight.bracket.depth_N > wide.bracket.depth_N


def test_solve_nonzero_left_value():
    # pushing x0 up must pull the certified slope down
    fam = FreudQuartic()
    res = solve(fam, 1, "1e-10")
    assert res.x1_star < make_real(GOLDEN, 256)
    assert res.bracket.lo < res.x1_star < res.bracket.hi


def test_solve_sqrtn_recovers_exact_value():
    res = solve(SqrtNExample(), 0, "1e-10")
    assert abs(res.x1_star - 1) < make_real("1e-10", 64)


def test_precision_cap_refuses_uncertified_result():
    with pytest.raises(EscalationExhausted) as err:
        solve(FreudQuartic(), 0, "1e-10", SolvePolicy(prec_cap=64))
    assert "uncertified" in str(err.value)


def test_tiny_escalation_budget_exhausts():
    with pytest.raises(EscalationExhausted):
        solve(FreudQuartic(), 0, "1e-25", SolvePolicy(max_escalations=1))


def test_scan_depth10_hand_rows():
    fam = FreudQuartic()
    grid = ["0.1", "0.5", "0.675978", "0.7", "2.0"]
    res = scan(fam, 0, grid, 10, 192)
    got = [(p.outcome, p.index) for p in res.points]
    assert got == [
        (Outcome.TOO_SMALL, 3),
        (Outcome.TOO_SMALL, 3),
        (Outcome.SURVIVED, 10),
        (Outcome.TOO_LARGE, 6),
        (Outcome.TOO_LARGE, 2),
    ]
    assert res.monotone
    assert res.window_lo == make_real("0.5", 192)
    assert res.window_hi == make_real("0.7", 192)


def test_scan_depth30_narrows_window():
    fam = FreudQuartic()
    res = scan(fam, 0, ["0.675978", "0.7"], 30, 192)
    assert res.points[0].outcome is Outcome.TOO_SMALL
    assert res.points[0].index == 15
    assert res.window_lo == make_real("0.675978", 192)


def test_scan_preserves_grid_order_and_flags_errors():
    fam = FreudQuartic()
    res = scan(fam, 0, ["0.5", "-1", "0.7"], 10, 128)
    assert res.points[1].outcome is None
    assert res.points[1].error is not None
    assert res.points[0].outcome is Outcome.TOO_SMALL
    assert res.points[2].outcome is Outcome.TOO_LARGE
    assert res.monotone  # error rows do not break ordering checks


def test_scan_workers_match_serial():
    fam = FreudQuartic()
    grid = [f"0.{d}" for d in range(2, 9)]
    serial = scan(fam, 0, grid, 25, 160, workers=1)
    pooled = scan(fam, 0, grid, 25, 160, workers=3)
    for a, b in zip(serial.points, pooled.points):
        assert a.t == b.t and a.outcome == b.outcome and a.index == b.index


def test_random_slopes_classify_consistently():
    # random slopes near the target: classification outcome must agree
    # with the side of the certified bracket the slope falls on
    fam = FreudQuartic()
    res = solve(fam, 0, "1e-14")
    rng = random.Random(0xC1A55)
    for _ in range(40):
        offset = rng.uniform(1e-12, 1e-2)
        side = rng.choice((-1, 1))
        t = make_real(GOLDEN, 256) + make_real(f"{side * offset:.17e}", 256)
        c = classify(fam, 0, t, 48, 256)
        if side < 0:
            assert c.outcome is Outcome.TOO_SMALL, (offset, side)
        else:
            assert c.outcome is Outcome.TOO_LARGE, (offset, side)
