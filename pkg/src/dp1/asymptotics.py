"""Scaled-limit prediction and convergence reporting.

Dividing the equation by ell(n) and writing t_n = x_n / sqrt(ell(n))
turns it into a perturbed constant-coefficient relation whose parameters
are the limits

    p_plus  = lim sigma(n,+1) sqrt(ell(n+1)/ell(n))
    sigma0  = lim sigma(n,0)          (must be > 0)
    p_minus = lim sigma(n,-1) sqrt(ell(n-1)/ell(n))
    q       = lim kappa(n) / sqrt(ell(n))

A trajectory that keeps its sign and converges must settle on a root of
(p_plus + sigma0 + p_minus) T^2 + q T - 1 = 0; the positive root is the
candidate limit of t_n for positive solutions, the negative root for
negative ones.

Limit parameters come from a family's closed form when it has one, and
otherwise from a tail window of coefficient evaluations.  A tail
estimate always carries its max in-window deviation per component; it is
reported, never averaged away, so a slowly-converging family is visible
as such rather than silently smoothed.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .coefficients import CoefficientFamily
from .errors import InvalidParameter, TooShort
from .precision import RealP, make_real, sqrt_p
from .recurrence import Trajectory, scaled_values


class LimitSource(Enum):
    CLOSED_FORM = "closed_form"
    TAIL_ESTIMATE = "tail_estimate"


@dataclass(frozen=True)
class LimitParams:
    p_plus: RealP
    sigma0: RealP
    p_minus: RealP
    q: RealP
    source: LimitSource
    window: Optional[tuple[int, int]] = None
    deviation: Optional[dict] = None

    def __post_init__(self):
        if self.sigma0.sign() <= 0:
            raise InvalidParameter("limit parameters need sigma0 > 0")
        if self.p_plus.sign() < 0 or self.p_minus.sign() < 0:
            raise InvalidParameter("side limits must be >= 0")


def _tail_component(
    family: CoefficientFamily, n: int, prec: int
) -> tuple[RealP, RealP, RealP, RealP]:
    ell_n = family.ell(n, prec)
    p_plus = family.sigma(n, 1, prec) * sqrt_p(family.ell(n + 1, prec) / ell_n)
    sigma0 = family.sigma(n, 0, prec)
    if n == 1:
        p_minus = make_real(0, prec)
    else:
        p_minus = family.sigma(n, -1, prec) * sqrt_p(
            family.ell(n - 1, prec) / ell_n
        )
    q = family.kappa(n, prec) / sqrt_p(ell_n)
    return p_plus, sigma0, p_minus, q


def limit_params(
    family: CoefficientFamily,
    prec: int,
    window: Optional[tuple[int, int]] = None,
) -> LimitParams:
    """Closed-form limits when the family has them, else a tail estimate.

    The tail estimate evaluates the four components across the window
    [n1, n2], reports the n2 values, and attaches the max deviation from
    them over the window as an instability measure.
    """
    if window is None:
        p_plus, sigma0, p_minus, q = family.limit_data(prec)
        return LimitParams(p_plus, sigma0, p_minus, q, LimitSource.CLOSED_FORM)
    n1, n2 = window
    if not (isinstance(n1, int) and isinstance(n2, int)) or not 1 <= n1 < n2:
        raise InvalidParameter(f"window must be ints 1 <= n1 < n2, got {window!r}")
    if family.max_index is not None and n2 + 1 > family.max_index:
        raise InvalidParameter(
            f"window end {n2} needs coefficients beyond the tabulated range "
            f"(n2 + 1 <= {family.max_index} required)"
        )
    names = ("p_plus", "sigma0", "p_minus", "q")
    at_end = dict(zip(names, _tail_component(family, n2, prec)))
    deviation = {k: make_real(0, prec) for k in names}
    for n in range(n1, n2):
        vals = dict(zip(names, _tail_component(family, n, prec)))
        for k in names:
            gap = abs(vals[k] - at_end[k])
            if gap > deviation[k]:
                deviation[k] = gap
    return LimitParams(
        at_end["p_plus"],
        at_end["sigma0"],
        at_end["p_minus"],
        at_end["q"],
        LimitSource.TAIL_ESTIMATE,
        window=(n1, n2),
        deviation=deviation,
    )


def _root_parts(params: LimitParams) -> tuple[RealP, RealP]:
    s = params.p_plus + params.sigma0 + params.p_minus
    if s.sign() <= 0:
        raise InvalidParameter("limit quadratic needs p_plus + sigma0 + p_minus > 0")
    disc = params.q * params.q + 4 * s
    return s, sqrt_p(disc)


def predicted_limit_positive(params: LimitParams) -> RealP:
    """Positive root of (p+ + sigma0 + p-) T^2 + q T - 1 = 0."""
    s, root = _root_parts(params)
    return (root - params.q) / (2 * s)


def predicted_limit_negative(params: LimitParams) -> RealP:
    """Negative root of the same quadratic."""
    s, root = _root_parts(params)
    return -(params.q + root) / (2 * s)


def scaled_trajectory(
    traj: Trajectory, family: CoefficientFamily
) -> list[tuple[int, RealP]]:
    """(n, t_n) pairs for n >= 1 at the trajectory precision."""
    return scaled_values(traj, family)


@dataclass(frozen=True)
class ConvergenceReport:
    """Gap between the scaled tail and the predicted limit.

    tail_index is the last index used: trajectory points beyond the
    certified depth are excluded because forward error growth makes
    them unreliable, and reporting them as evidence would be noise
    dressed as convergence."""

    tail_index: int
    t_tail: RealP
    predicted: RealP
    abs_gap: RealP
    window_min: RealP
    window_max: RealP


def convergence_report(
    traj: Trajectory,
    family: CoefficientFamily,
    params: LimitParams,
    certified_depth: Optional[int] = None,
) -> ConvergenceReport:
    last = traj.last_index
    if traj.points[last].sign() <= 0:
        last -= 1
    if certified_depth is not None:
        last = min(last, certified_depth)
    if last < 1:
        raise TooShort("no positive trajectory points inside the certified depth")
    scaled = scaled_values(traj, family)[:last]
    t_vals = [t for _, t in scaled]
    t_tail = t_vals[-1]
    predicted = predicted_limit_positive(params)
    lo = hi = t_vals[0]
    for t in t_vals[1:]:
        if t < lo:
            lo = t
        if t > hi:
            hi = t
    return ConvergenceReport(
        tail_index=scaled[-1][0],
        t_tail=t_tail,
        predicted=predicted,
        abs_gap=abs(t_tail - predicted),
        window_min=lo,
        window_max=hi,
    )
