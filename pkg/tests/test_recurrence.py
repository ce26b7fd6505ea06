"""Forward iteration: hand-checked steps, termination bookkeeping,
defect measurement, and trajectory (de)serialization."""

import random

import pytest

from dp1.coefficients import (
    FreudQuartic,
    MiddleOnlyExample,
    SqrtNExample,
    Tabulated,
)
from dp1.errors import InvalidParameter, ParseError, TooShort
from dp1.precision import make_real, sqrt_p
from dp1.recurrence import (
    TerminationKind,
    Trajectory,
    apriori_upper_bound,
    forward_step,
    iterate,
    read_trajectory_csv,
    residual,
    scaled_values,
    tabulate_solution,
    write_trajectory_csv,
)


def test_forward_step_hand_values():
    fam = FreudQuartic()
    z = make_real(0, 128)
    # ell_1 = 1: from x_1 = 1/2 the next value is 2 - 1/2 = 3/2
    assert forward_step(fam, 1, z, make_real("0.5", 128), 128) == make_real(
        "1.5", 128
    )
    # x_1 = 1 lands exactly on zero
    assert forward_step(fam, 1, z, make_real(1, 128), 128).is_zero()
    # sqrt-n family at n = 2 continues the exact solution
    sq = SqrtNExample()
    x3 = forward_step(
        sq, 2, make_real(1, 192), sqrt_p(make_real(2, 192)), 192
    )
    gap = abs(x3 - sqrt_p(make_real(3, 192)))
    assert gap < make_real("1e-55", 64), gap.to_decimal()


def test_forward_step_matches_documented_operation_order():
    # the step must be (ell/x - s0*x - sm1*prev - kappa) / sp1 with one
    # rounding per operation, in exactly that order
    fam = FreudQuartic(c="1.1", K="0.3", rho="0.2")
    prec = 64
    prev, cur = make_real("0.4", prec), make_real("0.8", prec)
    acc = fam.ell(5, prec) / cur
    acc = acc - fam.sigma(5, 0, prec) * cur
    acc = acc - fam.sigma(5, -1, prec) * prev
    acc = acc - fam.kappa(5, prec)
    expected = acc / fam.sigma(5, 1, prec)
    assert forward_step(fam, 5, prev, cur, prec) == expected


def test_iterate_hand_examples():
    fam = FreudQuartic()
    tr = iterate(fam, 0, "0.1", 5, 128)
    assert tr.termination.kind is TerminationKind.NONPOSITIVE
    assert tr.termination.index == 3
    # exact rational forward image of 1/10 is -970/99 at n = 3
    ref = make_real(-970, 256) / 99
    assert abs(tr.x(3) - ref) < make_real("1e-30", 64)
    tr2 = iterate(fam, 0, 2, 5, 128)
    assert tr2.termination.index == 2
    assert tr2.x(2) == make_real("-1.5", 128)


def test_iterate_completes_and_records_everything():
    fam = FreudQuartic()
    golden = "0.67597824006728472899544768467080574828728345491541"
    tr = iterate(fam, 0, golden, 12, 192)
    assert tr.termination.kind is TerminationKind.COMPLETED
    # one new point per step applied at n = 1..12, so the last index is 13
    assert len(tr) == 14 and tr.last_index == 13
    assert tr.x(0).is_zero()
    assert all(tr.x(n).sign() > 0 for n in range(1, 14))


def test_iterate_rejects_nonpositive_start():
    fam = FreudQuartic()
    with pytest.raises(InvalidParameter):
        iterate(fam, 0, 0, 4, 128)
    with pytest.raises(InvalidParameter):
        iterate(fam, 0, -1, 4, 128)


def test_sqrtn_trajectory_tracks_exact_solution():
    sq = SqrtNExample()
    tr = iterate(sq, 0, 1, 20, 192)
    assert tr.termination.kind is TerminationKind.COMPLETED
    for n in range(1, 21):
        gap = abs(tr.x(n) - sqrt_p(make_real(n, 256)))
        assert gap < make_real("1e-20", 64), (n, gap.to_decimal())


def test_residual_on_tabulated_exact_solution():
    vals = [sqrt_p(make_real(n, 128)).to_decimal() for n in range(0, 101)]
    tr = tabulate_solution(vals, 128, "sqrtn-table")
    r = residual(tr, SqrtNExample())
    assert r < make_real("1e-30", 64), r.to_decimal()


def test_residual_needs_three_points():
    tr = tabulate_solution(["0", "1"], 128, "short")
    with pytest.raises(TooShort):
        residual(tr, FreudQuartic())


def test_apriori_upper_bound_hand_values():
    fam = FreudQuartic()
    assert apriori_upper_bound(fam, 4, 128) == 2
    assert apriori_upper_bound(fam, 9, 128) == 3
    famk = FreudQuartic(K="2")
    ref = sqrt_p(make_real(3, 128)) - 1
    assert abs(apriori_upper_bound(famk, 2, 128) - ref) < make_real("1e-35", 64)
    with pytest.raises(InvalidParameter):
        apriori_upper_bound(MiddleOnlyExample(), 2, 128)


def test_apriori_bound_majorizes_positive_solutions():
    # every surviving trajectory value must sit below the bound
    fam = FreudQuartic(K="1")
    golden_k1 = "0.4679199169736651886374212983306156396087"
    tr = iterate(fam, 0, golden_k1, 10, 192)
    for n in range(2, 11):
        if tr.x(n).sign() <= 0:
            break
        assert tr.x(n) < apriori_upper_bound(fam, n, 192)


def test_scaled_values_definition():
    fam = FreudQuartic()
    tr = iterate(fam, 0, "0.6759782400672847", 8, 128)
    sv = dict(scaled_values(tr, fam))
    assert sv[1] == tr.x(1)  # ell_1 = 1
    assert abs(sv[4] - tr.x(4) / 2) < make_real("1e-35", 64)  # sqrt(ell_4) = 2


def test_trajectory_csv_round_trip(tmp_path):
    fam = FreudQuartic()
    tr = iterate(fam, 0, "0.5", 6, 128)
    path = str(tmp_path / "traj.csv")
    write_trajectory_csv(path, tr, fam)
    back = read_trajectory_csv(path, 128)
    assert len(back) == len(tr)
    for n in range(len(tr)):
        assert back.x(n) == tr.x(n), n


def test_trajectory_csv_rejects_malformed(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("a,b\n0,1\n")
    with pytest.raises((InvalidParameter, ParseError)):
        read_trajectory_csv(str(p), 128)
    p2 = tmp_path / "gap.csv"
    p2.write_text("n,x_n\n0,0\n2,1\n")
    with pytest.raises(InvalidParameter):
        read_trajectory_csv(str(p2), 128)


def test_tabulate_solution_contract():
    tr = tabulate_solution(["0", "1", "1.5"], 64, "by-hand")
    assert tr.termination.kind is TerminationKind.COMPLETED
    assert tr.family_id == "by-hand"
    assert tr.x(2) == make_real("1.5", 64)


def test_random_restarts_are_deterministic():
    # identical inputs yield bit-identical trajectories
    rng = random.Random(0xD5EED)
    fam = FreudQuartic(K="-0.5")
    for _ in range(20):
        start = f"0.{rng.randint(10**6, 10**7 - 1)}"
        a = iterate(fam, 0, start, 15, 128)
        b = iterate(fam, 0, start, 15, 128)
        assert len(a) == len(b)
        assert all(a.x(i) == b.x(i) for i in range(len(a)))
        assert a.termination == b.termination
