"""Certified bisection on the initial slope x_1.

The positive solution is pinned by a nested-interval construction: at
each depth n there is a window of slopes whose trajectories are still
positive, the windows shrink geometrically, and their intersection is
the single good slope x_1*.  A slope below the window dies at an odd
index, a slope above it dies at an even index.  That parity rule is what
``classify`` reads off a trajectory, and it is validated empirically by
the test suite (the classification-direction data is exposed, not
hidden, so the rule can be audited on any family).

``solve`` runs bisection on the classification with two escalation axes:

* depth N doubles whenever a midpoint survives all N steps - survival is
  always read as "N too small", never as convergence;
* precision P doubles whenever the bracket stops shrinking (the dyadic
  midpoint collides with an endpoint) or an endpoint re-classifies on
  the wrong side, which signals that rounding noise has reached the
  classification scale.

Precision is also tied to depth up front: forward errors grow roughly
geometrically, about one constant factor per step, so the policy keeps
P >= guard_bits + bits_per_step * N.  The default 4 bits/step is about
twice the measured loss rate on the quartic-weight family; it is a
policy knob, not a constant of nature, and families with harsher error
growth can raise it.

Certification is two-sided: a result is returned only when the final
bracket has a TooSmall witness at its left end and a TooLarge witness at
its right end, both computed at the final precision.  When the
escalation budget or a precision cap prevents that, ``solve`` raises
``EscalationExhausted`` instead of returning an uncertified number.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Union

from .coefficients import CoefficientFamily
from .errors import (
    EscalationExhausted,
    DomainError,
    InvalidParameter,
    NotApplicable,
)
from .precision import RealP, make_real, zero
from .recurrence import TerminationKind, Trajectory, iterate

DEFAULT_PREC_ENV = "DP1_DEFAULT_PREC"


def default_precision() -> int:
    """Baseline precision: DP1_DEFAULT_PREC if set, else 128 bits."""
    raw = os.environ.get(DEFAULT_PREC_ENV)
    if raw is None:
        return 128
    try:
        p = int(raw)
    except ValueError:
        raise InvalidParameter(
            f"{DEFAULT_PREC_ENV} must be an integer, got {raw!r}"
        ) from None
    if p < 53:
        raise InvalidParameter(f"{DEFAULT_PREC_ENV} must be >= 53, got {p}")
    return p


class Outcome(Enum):
    TOO_SMALL = "too_small"
    TOO_LARGE = "too_large"
    SURVIVED = "survived"


@dataclass(frozen=True)
class Classification:
    """Verdict on one trial slope.

    index is the first nonpositive index (odd for TooSmall, even for
    TooLarge) or the survived depth N.
    """

    outcome: Outcome
    index: int

    def __post_init__(self):
        if self.outcome is Outcome.TOO_SMALL and (
            self.index < 3 or self.index % 2 == 0
        ):
            raise InvalidParameter(f"TooSmall index must be odd >= 3, got {self.index}")
        if self.outcome is Outcome.TOO_LARGE and (
            self.index < 2 or self.index % 2 == 1
        ):
            raise InvalidParameter(f"TooLarge index must be even >= 2, got {self.index}")


def classify(
    family: CoefficientFamily,
    x0: Union[RealP, str, int],
    t: Union[RealP, str, int],
    n_steps: int,
    prec: int,
) -> Classification:
    """Classify trial slope t by the parity of its first failure index."""
    cls, _ = classify_with_trajectory(family, x0, t, n_steps, prec)
    return cls


def classify_with_trajectory(
    family: CoefficientFamily,
    x0: Union[RealP, str, int],
    t: Union[RealP, str, int],
    n_steps: int,
    prec: int,
) -> tuple[Classification, Trajectory]:
    tr = make_real(t, prec)
    if tr.sign() <= 0:
        raise InvalidParameter("trial slope must be strictly positive")
    traj = iterate(family, x0, tr, n_steps, prec)
    kind = traj.termination.kind
    if kind is TerminationKind.COMPLETED:
        return Classification(Outcome.SURVIVED, n_steps), traj
    if kind is TerminationKind.NONPOSITIVE:
        m = traj.termination.index
        out = Outcome.TOO_SMALL if m % 2 == 1 else Outcome.TOO_LARGE
        return Classification(out, m), traj
    raise NotApplicable(
        f"trajectory hit {kind.value} at index {traj.termination.index}; "
        "the bracketing construction needs a positive up-weight"
    )


def initial_bracket(
    family: CoefficientFamily,
    x0: Union[RealP, str, int],
    prec: int,
) -> tuple[RealP, RealP]:
    """[0, hi] where hi strictly exceeds every surviving slope.

    hi is one more than the positive root of the n = 1 balance quadratic
    sigma(1,0) t^2 + (sigma(1,-1) x_0 + kappa(1)) t - ell(1) = 0; any
    slope at or beyond that root already sends x_2 nonpositive.
    """
    from .precision import sqrt_p

    x0r = make_real(x0, prec)
    s0 = family.sigma(1, 0, prec)
    if s0.is_zero():
        raise NotApplicable("initial bracket needs sigma(1,0) > 0")
    b = family.sigma(1, -1, prec) * x0r + family.kappa(1, prec)
    disc = b * b + 4 * s0 * family.ell(1, prec)
    root = (sqrt_p(disc) - b) / (2 * s0)
    return zero(prec), make_real(1, prec) + root


@dataclass(frozen=True)
class SolvePolicy:
    """Escalation policy knobs for ``solve``.

    precision of None defers to DP1_DEFAULT_PREC (or 128).  Escalations
    count every doubling of N or P; the budget is shared.
    """

    n0: int = 16
    precision: Optional[int] = None
    max_escalations: int = 24
    bits_per_step: float = 4.0
    guard_bits: int = 64
    prec_cap: Optional[int] = None

    def initial_precision(self) -> int:
        p = self.precision if self.precision is not None else default_precision()
        if p < 53:
            raise InvalidParameter(f"precision must be >= 53, got {p}")
        if self.prec_cap is not None and p > self.prec_cap:
            p = self.prec_cap
        return p

    def required_precision(self, n_steps: int) -> int:
        return self.guard_bits + math.ceil(self.bits_per_step * n_steps)


@dataclass(frozen=True)
class Bracket:
    """Certified enclosure of x_1*.

    depth_N is the number of steps through which both endpoint
    trajectories remain positive: inside that prefix every slope in
    [lo, hi] is numerically indistinguishable from the certified one,
    which is what downstream tail analysis may rely on.
    """

    lo: RealP
    hi: RealP
    depth_N: int
    precision_bits: int

    def __post_init__(self):
        if not self.lo < self.hi:
            raise InvalidParameter("bracket needs lo < hi")


@dataclass(frozen=True)
class SolveResult:
    x1_star: RealP
    bracket: Bracket
    n_used: int
    p_used: int
    classifications: int
    escalations: tuple[str, ...]

    @property
    def relative_width(self) -> RealP:
        return (self.bracket.hi - self.bracket.lo) / self.x1_star


class _Budget:
    """Shared escalation counter with a hard ceiling."""

    def __init__(self, limit: int):
        self.limit = limit
        self.events: list[str] = []

    def spend(self, event: str, detail: str = "") -> None:
        self.events.append(event)
        if len(self.events) > self.limit:
            raise EscalationExhausted(
                f"escalation budget of {self.limit} spent; last event {event}"
                + (f" ({detail})" if detail else "")
            )


def solve(
    family: CoefficientFamily,
    x0: Union[RealP, str, int],
    tol: Union[RealP, str],
    policy: Optional[SolvePolicy] = None,
) -> SolveResult:
    """Bisect to a certified bracket of relative width <= tol."""
    policy = policy or SolvePolicy()
    if policy.n0 < 1:
        raise InvalidParameter("n0 must be >= 1")
    budget = _Budget(policy.max_escalations)
    n_steps = policy.n0
    prec = policy.initial_precision()
    x0_input = x0
    classifications = 0

    def bump_prec(cur: int, reason: str) -> int:
        new = cur * 2
        if policy.prec_cap is not None and new > policy.prec_cap:
            raise EscalationExhausted(
                f"need more than the precision cap of {policy.prec_cap} bits "
                f"({reason}); refusing to return an uncertified value"
            )
        budget.spend(f"P:{cur}->{new}", reason)
        return new

    def bump_depth(cur: int, reason: str) -> int:
        budget.spend(f"N:{cur}->{cur * 2}", reason)
        return cur * 2

    def ensure_depth_precision(cur_prec: int) -> int:
        while cur_prec < policy.required_precision(n_steps):
            cur_prec = bump_prec(
                cur_prec, f"depth {n_steps} needs {policy.required_precision(n_steps)} bits"
            )
        return cur_prec

    prec = ensure_depth_precision(prec)
    lo, hi = initial_bracket(family, make_real(x0_input, prec), prec)
    lo_cls: Optional[Classification] = None  # witness for lo (None while lo == 0)
    hi_cls: Optional[Classification] = None
    witness_prec = prec

    while True:
        prec = ensure_depth_precision(prec)
        x0r = make_real(x0_input, prec)
        tolr = make_real(tol, prec)
        if tolr.sign() <= 0:
            raise InvalidParameter("tol must be strictly positive")
        lo = lo.with_precision(prec)
        hi = hi.with_precision(prec)
        if witness_prec != prec:
            lo_cls = None
            hi_cls = None
            witness_prec = prec

        # (Re)establish endpoint witnesses at the current precision.  A
        # verdict at fixed precision does not depend on the depth it was
        # observed at, so witnesses survive N escalations but not P ones.
        restart = False
        while lo_cls is None and lo.sign() > 0:
            c = classify(family, x0r, lo, n_steps, prec)
            classifications += 1
            if c.outcome is Outcome.TOO_SMALL:
                lo_cls = c
            elif c.outcome is Outcome.SURVIVED:
                n_steps = bump_depth(n_steps, "left endpoint survived")
                if prec < policy.required_precision(n_steps):
                    restart = True
                    break
            else:
                # Wrong side: the bracket was shrunk on rounding noise.
                prec = bump_prec(prec, "left endpoint classified TooLarge")
                lo, hi = initial_bracket(family, make_real(x0_input, prec), prec)
                lo_cls = hi_cls = None
                witness_prec = prec
                restart = True
                break
        if restart:
            continue
        while hi_cls is None:
            c = classify(family, x0r, hi, n_steps, prec)
            classifications += 1
            if c.outcome is Outcome.TOO_LARGE:
                hi_cls = c
            elif c.outcome is Outcome.SURVIVED:
                n_steps = bump_depth(n_steps, "right endpoint survived")
                if prec < policy.required_precision(n_steps):
                    restart = True
                    break
            else:
                prec = bump_prec(prec, "right endpoint classified TooSmall")
                lo, hi = initial_bracket(family, make_real(x0_input, prec), prec)
                lo_cls = hi_cls = None
                witness_prec = prec
                restart = True
                break
        if restart:
            continue

        # Bisect at fixed (N, P); leave this loop only to escalate.
        while True:
            mid = (lo + hi) / 2
            if not (lo < mid < hi):
                prec = bump_prec(prec, "midpoint not representable inside bracket")
                break
            c = classify(family, x0r, mid, n_steps, prec)
            classifications += 1
            if c.outcome is Outcome.SURVIVED:
                n_steps = bump_depth(n_steps, f"midpoint survived {n_steps} steps")
                if prec < policy.required_precision(n_steps):
                    break
                continue
            if c.outcome is Outcome.TOO_SMALL:
                lo, lo_cls = mid, c
            else:
                hi, hi_cls = mid, c
            mid = (lo + hi) / 2
            if hi - lo <= tolr * mid:
                if lo_cls is None or hi_cls is None:
                    # Unreachable for tol < 1: the relative width at a zero
                    # left endpoint is 2.  Kept as a loud guard.
                    raise EscalationExhausted(
                        "bracket narrowed without both witnesses"
                    )
                depth = min(lo_cls.index, hi_cls.index) - 1
                bracket = Bracket(lo, hi, depth, prec)
                return SolveResult(
                    x1_star=mid,
                    bracket=bracket,
                    n_used=n_steps,
                    p_used=prec,
                    classifications=classifications,
                    escalations=tuple(budget.events),
                )


@dataclass(frozen=True)
class ScanPoint:
    t: RealP
    outcome: Optional[Outcome]
    index: Optional[int]
    error: Optional[str] = None


@dataclass(frozen=True)
class ScanResult:
    """Grid classifications plus the empirical survival window.

    window_lo / window_hi are the largest TooSmall and smallest TooLarge
    grid slopes; the depth-N survival window lies between them when the
    grid is monotone (no TooLarge below a TooSmall)."""

    points: tuple[ScanPoint, ...]
    window_lo: Optional[RealP]
    window_hi: Optional[RealP]
    monotone: bool


def _scan_task(args) -> tuple[str, Optional[int], Optional[str]]:
    family, x0_text, t_text, n_steps, prec = args
    try:
        c = classify(family, x0_text, t_text, n_steps, prec)
        return c.outcome.value, c.index, None
    except DomainError as exc:
        return "error", None, f"{type(exc).__name__}: {exc}"


def scan(
    family: CoefficientFamily,
    x0: Union[RealP, str, int],
    grid: Sequence[Union[RealP, str, int]],
    n_steps: int,
    prec: int,
    workers: int = 1,
) -> ScanResult:
    """Classify every grid slope; embarrassingly parallel over the grid.

    Values cross the worker boundary as decimal strings, which reparse
    to identical bits at the same precision, so the pooled run is
    bit-identical to the sequential one.
    """
    if workers < 1:
        raise InvalidParameter("workers must be >= 1")
    x0_text = make_real(x0, prec).to_decimal()
    t_texts = [make_real(t, prec).to_decimal() for t in grid]
    tasks = [(family, x0_text, t, n_steps, prec) for t in t_texts]
    if workers == 1 or len(tasks) < 2:
        raws = [_scan_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            raws = list(pool.map(_scan_task, tasks))
    points = []
    for t_text, (outcome, index, err) in zip(t_texts, raws):
        t_val = make_real(t_text, prec)
        if err is None:
            points.append(ScanPoint(t_val, Outcome(outcome), index))
        else:
            points.append(ScanPoint(t_val, None, None, err))
    window_lo: Optional[RealP] = None
    window_hi: Optional[RealP] = None
    for p in points:
        if p.outcome is Outcome.TOO_SMALL:
            if window_lo is None or p.t > window_lo:
                window_lo = p.t
        elif p.outcome is Outcome.TOO_LARGE:
            if window_hi is None or p.t < window_hi:
                window_hi = p.t
    ordered = sorted(
        (p for p in points if p.outcome is not None), key=lambda p: p.t
    )
    rank = {Outcome.TOO_SMALL: 0, Outcome.SURVIVED: 1, Outcome.TOO_LARGE: 2}
    ranks = [rank[p.outcome] for p in ordered]
    monotone = all(a <= b for a, b in zip(ranks, ranks[1:]))
    return ScanResult(tuple(points), window_lo, window_hi, monotone)
