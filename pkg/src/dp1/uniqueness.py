"""Sufficient conditions for uniqueness of the positive solution.

Per index n the family lands in one of three buckets, computed from
s = sigma_max(n) and s0 = sigma(n,0):

    star     2 s <= s0
    dagger   s <= s0 < 2 s  and
             -2 (s0 - s) sqrt(ell(n)) <= kappa(n) sqrt(2 s - s0)
    neither  anything else

Uniqueness of the positive solution follows when every n is star or
dagger, the initial-data condition at n = 1 holds, and the normalized
growth expression

    (1/n^2) * (ell(n)/s0 + (kappa_-(n)/s0)^2),   kappa_- = (|kappa|-kappa)/2

has liminf zero.  The last hypothesis is asymptotic, so no finite window
can verify it; a verdict is only UniqueCertified when the family can
state a structural certificate (closed-form kinds whose conditions hold
for every n by monotonicity of the formulas).  Otherwise the best a
window check can honestly deliver is UniqueUpToWindow.

Dagger indices also carry a pointwise ceiling on any positive solution,
x_n <= sqrt(ell(n)) / sqrt(2 s - s0), checked by
``solution_bound_check``.

The window lemma at the bottom is the convexity workhorse behind the
star bucket: a window-convex sequence whose final difference is
nonpositive is nonincreasing on the window.  Its comparisons are exact
(integer arithmetic on the dyadic representations), because the lemma
is used as a certificate, not an estimate.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Union

from .coefficients import CoefficientFamily
from .errors import InvalidParameter, TooShort
from .precision import RealP, make_real, sqrt_p
from .recurrence import Trajectory


class Condition(Enum):
    STAR = "star"
    DAGGER = "dagger"
    NEITHER = "neither"


class VerdictKind(Enum):
    UNIQUE_CERTIFIED = "unique_certified"
    UNIQUE_UP_TO_WINDOW = "unique_up_to_window"
    INCONCLUSIVE = "inconclusive"


def check_star(family: CoefficientFamily, n: int, prec: int) -> bool:
    s = family.sigma_max(n, prec)
    return 2 * s <= family.sigma(n, 0, prec)


def check_dagger(family: CoefficientFamily, n: int, prec: int) -> bool:
    s = family.sigma_max(n, prec)
    s0 = family.sigma(n, 0, prec)
    if not (s <= s0 < 2 * s):
        return False
    lhs = -2 * (s0 - s) * sqrt_p(family.ell(n, prec))
    rhs = family.kappa(n, prec) * sqrt_p(2 * s - s0)
    return lhs <= rhs


def classify_condition(family: CoefficientFamily, n: int, prec: int) -> Condition:
    if check_star(family, n, prec):
        return Condition.STAR
    if check_dagger(family, n, prec):
        return Condition.DAGGER
    return Condition.NEITHER


def check_x0(
    family: CoefficientFamily, x0: Union[RealP, str, int], prec: int
) -> bool:
    """Initial-data condition at n = 1.

    Star at n = 1 short-circuits to True (the condition is only needed
    on dagger indices).  A Neither at n = 1 returns False: the
    hypotheses are already unmet there.
    """
    cond = classify_condition(family, 1, prec)
    if cond is Condition.STAR:
        return True
    if cond is Condition.NEITHER:
        return False
    x0r = make_real(x0, prec)
    s = family.sigma_max(1, prec)
    s0 = family.sigma(1, 0, prec)
    lhs = -2 * (s0 - s) * sqrt_p(family.ell(1, prec))
    rhs = (family.sigma(1, -1, prec) * x0r + family.kappa(1, prec)) * sqrt_p(
        2 * s - s0
    )
    return lhs <= rhs


@dataclass(frozen=True)
class LiminfEvidence:
    """Window minimum of the normalized growth expression.

    window_min is None when the expression is undefined on the whole
    window (middle coefficient identically zero).  symbolic carries the
    family's structural reason the liminf is zero, when it has one.
    """

    window_min: Optional[RealP]
    argmin: Optional[int]
    symbolic: Optional[str]


def check_liminf(
    family: CoefficientFamily, window_n: int, prec: int
) -> LiminfEvidence:
    if window_n < 1:
        raise InvalidParameter("window must be >= 1")
    best: Optional[RealP] = None
    best_n: Optional[int] = None
    for n in range(1, window_n + 1):
        s0 = family.sigma(n, 0, prec)
        if s0.is_zero():
            continue
        k = family.kappa(n, prec)
        k_neg = (abs(k) - k) / 2
        ratio = k_neg / s0
        val = (family.ell(n, prec) / s0 + ratio * ratio) / make_real(n * n, prec)
        if best is None or val < best:
            best, best_n = val, n
    return LiminfEvidence(best, best_n, family.liminf_certificate())


@dataclass(frozen=True)
class Verdict:
    kind: VerdictKind
    window: Optional[int] = None


@dataclass(frozen=True)
class UniquenessReport:
    family_id: str
    x0: str
    window_n: int
    precision_bits: int
    per_n: tuple[Condition, ...]
    x0_ok: bool
    liminf: LiminfEvidence
    partition_certificate: Optional[str]
    verdict: Verdict

    def condition_counts(self) -> dict[str, int]:
        out = {c.value: 0 for c in Condition}
        for c in self.per_n:
            out[c.value] += 1
        return out

    def first_neither(self) -> Optional[int]:
        for i, c in enumerate(self.per_n, start=1):
            if c is Condition.NEITHER:
                return i
        return None

    def per_n_runs(self) -> list[tuple[str, int, int]]:
        """Run-length encoding of per_n as (condition, n_from, n_to)."""
        runs: list[tuple[str, int, int]] = []
        for i, c in enumerate(self.per_n, start=1):
            if runs and runs[-1][0] == c.value:
                runs[-1] = (c.value, runs[-1][1], i)
            else:
                runs.append((c.value, i, i))
        return runs


def verdict(
    family: CoefficientFamily,
    x0: Union[RealP, str, int],
    window_n: int,
    prec: int,
) -> UniquenessReport:
    """Assemble per-n checks and the strongest honest verdict."""
    if window_n < 1:
        raise InvalidParameter("window must be >= 1")
    if family.max_index is not None:
        window_n = min(window_n, family.max_index)
    per_n = tuple(
        classify_condition(family, n, prec) for n in range(1, window_n + 1)
    )
    x0_ok = check_x0(family, x0, prec)
    liminf = check_liminf(family, window_n, prec)
    partition = family.partition_certificate()
    all_in = all(c is not Condition.NEITHER for c in per_n)
    if not all_in or not x0_ok:
        v = Verdict(VerdictKind.INCONCLUSIVE)
    elif partition is not None and liminf.symbolic is not None:
        v = Verdict(VerdictKind.UNIQUE_CERTIFIED)
    else:
        v = Verdict(VerdictKind.UNIQUE_UP_TO_WINDOW, window_n)
    return UniquenessReport(
        family_id=family.family_id(),
        x0=make_real(x0, prec).to_decimal(),
        window_n=window_n,
        precision_bits=prec,
        per_n=per_n,
        x0_ok=x0_ok,
        liminf=liminf,
        partition_certificate=partition,
        verdict=v,
    )


def solution_bound_check(
    traj: Trajectory,
    family: CoefficientFamily,
    report: UniquenessReport,
) -> bool:
    """x_n <= sqrt(ell(n))/sqrt(2 sigma_max - sigma_0) on dagger indices.

    Checked with 4 ulp of slack at the trajectory precision, over the
    indices shared by the trajectory, the report window, and the
    positive prefix.
    """
    from .precision import one_ulp

    prec = traj.precision_bits
    last = traj.last_index
    if traj.points[last].sign() <= 0:
        last -= 1
    top = min(last, report.window_n)
    for n in range(1, top + 1):
        if report.per_n[n - 1] is not Condition.DAGGER:
            continue
        s = family.sigma_max(n, prec)
        s0 = family.sigma(n, 0, prec)
        bound = sqrt_p(family.ell(n, prec)) / sqrt_p(2 * s - s0)
        slack = 4 * one_ulp(bound)
        if traj.points[n] > bound + slack:
            return False
    return True


# -- window convexity lemma ------------------------------------------------


@dataclass(frozen=True)
class LemmaReport:
    """Exact convexity/monotonicity facts about a finite window.

    first_violation is the smallest interior offset k (0-based into the
    window) where 2 w_k > w_{k-1} + w_{k+1}, or None.
    """

    convex_on_window: bool
    differences_nondecreasing: bool
    nonincreasing: bool
    first_violation: Optional[int]


def _dyadic(x: RealP) -> tuple[int, int]:
    return x.as_mantissa_exp()


def _sum_le(lhs: list[tuple[int, int]], rhs: list[tuple[int, int]]) -> bool:
    """Exact comparison of two sums of dyadic rationals."""
    exps = [e for _, e in lhs + rhs]
    base = min(exps)
    l = sum(m << (e - base) for m, e in lhs)
    r = sum(m << (e - base) for m, e in rhs)
    return l <= r


def lemma_nonincreasing(window: Sequence[RealP]) -> LemmaReport:
    """Exact check of: window-convex and final difference <= 0 implies
    nonincreasing.

    The report states the facts separately so a caller can see which
    hypothesis failed; all comparisons are exact on the stored dyadic
    values, so the report is a certificate, not an estimate.
    """
    if len(window) < 3:
        raise TooShort("the window lemma needs at least 3 points")
    d = [_dyadic(x) for x in window]
    first_violation: Optional[int] = None
    for k in range(1, len(window) - 1):
        two_mid = (d[k][0] * 2, d[k][1])
        if not _sum_le([two_mid], [d[k - 1], d[k + 1]]):
            first_violation = k
            break
    convex = first_violation is None
    # Differences nondecreasing is the same statement rearranged; computed
    # independently from the difference pairs as a self-check.
    diffs_ok = True
    for k in range(1, len(window) - 1):
        lhs = [d[k], (-d[k - 1][0], d[k - 1][1])]
        rhs = [d[k + 1], (-d[k][0], d[k][1])]
        if not _sum_le(lhs, rhs):
            diffs_ok = False
            break
    nonincr = all(
        _sum_le([d[k + 1]], [d[k]]) for k in range(len(window) - 1)
    )
    return LemmaReport(convex, diffs_ok, nonincr, first_violation)
