"""Forward iteration of the difference equation and residual checks.

Solving the equation for x_{n+1} gives the forward step

    x_{n+1} = (ell(n)/x_n - sigma(n,0) x_n - sigma(n,-1) x_{n-1}
               - kappa(n)) / sigma(n,+1)

which is evaluated in exactly that operation order so a trajectory is a
deterministic function of (family, x_0, x_1, N, precision).  Iteration
stops at the first nonpositive value; the trajectory keeps that value as
its last point because its index and sign are what the shooting layer
classifies on.

The step is violently unstable in the forward direction (errors grow
geometrically), which is intentional: the shooting method depends on
wrong initial slopes blowing up fast.  Residuals, by contrast, are
stable: every computed trajectory satisfies its own defining equation to
a few ulp at the working precision no matter how far it has drifted from
the mathematical solution, so the residual check measures table or
transport corruption, not step rounding.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Union

from .coefficients import CoefficientFamily
from .errors import (
    DivisionByZero,
    InvalidParameter,
    SigmaRightZero,
    TooShort,
)
from .precision import RealP, make_real, sqrt_p


class TerminationKind(Enum):
    COMPLETED = "completed"
    NONPOSITIVE = "nonpositive"
    SIGMA_RIGHT_ZERO = "sigma_right_zero"
    DIVISION_BY_ZERO = "division_by_zero"


@dataclass(frozen=True)
class Termination:
    """Why iteration stopped; index is the step count when completed,
    otherwise the index of the offending value or coefficient."""

    kind: TerminationKind
    index: int

    @classmethod
    def completed(cls, n_steps: int) -> "Termination":
        return cls(TerminationKind.COMPLETED, n_steps)

    @classmethod
    def nonpositive_at(cls, m: int) -> "Termination":
        return cls(TerminationKind.NONPOSITIVE, m)


@dataclass(frozen=True)
class Trajectory:
    """Computed points x_0 .. x_last at a fixed working precision.

    Every interior point is strictly positive; only the last point may be
    nonpositive, and then the termination records its index.
    """

    points: tuple[RealP, ...]
    precision_bits: int
    termination: Termination
    family_id: str

    def __len__(self) -> int:
        return len(self.points)

    @property
    def last_index(self) -> int:
        return len(self.points) - 1

    def x(self, k: int) -> RealP:
        return self.points[k]


def forward_step(
    family: CoefficientFamily,
    n: int,
    x_prev: RealP,
    x_cur: RealP,
    prec: int,
) -> RealP:
    """One step of the recurrence at index n (computes x_{n+1})."""
    family.check_index(n)
    s_up = family.sigma(n, 1, prec)
    if s_up.is_zero():
        raise SigmaRightZero(f"sigma(n,+1) is zero at n = {n}")
    if x_cur.is_zero():
        raise DivisionByZero(f"x_{n} is exactly zero; cannot divide")
    acc = family.ell(n, prec) / x_cur
    acc = acc - family.sigma(n, 0, prec) * x_cur
    acc = acc - family.sigma(n, -1, prec) * x_prev
    acc = acc - family.kappa(n, prec)
    return acc / s_up


def iterate(
    family: CoefficientFamily,
    x0: Union[RealP, str, int],
    x1: Union[RealP, str, int],
    n_steps: int,
    prec: int,
) -> Trajectory:
    """Run the forward recurrence for up to n_steps steps.

    Stops early at the first nonpositive value (kept as the final point)
    or at a zero up-weight, recording which in the termination.
    """
    if not isinstance(n_steps, int) or n_steps < 1:
        raise InvalidParameter(f"step count must be an int >= 1, got {n_steps!r}")
    x0r = make_real(x0, prec)
    x1r = make_real(x1, prec)
    if x1r.sign() <= 0:
        raise InvalidParameter("x1 must be strictly positive")
    points = [x0r, x1r]
    term = Termination.completed(n_steps)
    for n in range(1, n_steps + 1):
        try:
            nxt = forward_step(family, n, points[n - 1], points[n], prec)
        except SigmaRightZero:
            term = Termination(TerminationKind.SIGMA_RIGHT_ZERO, n)
            break
        except DivisionByZero:
            term = Termination(TerminationKind.DIVISION_BY_ZERO, n)
            break
        points.append(nxt)
        if nxt.sign() <= 0:
            term = Termination.nonpositive_at(n + 1)
            break
    return Trajectory(tuple(points), prec, term, family.family_id())


def residual(traj: Trajectory, family: CoefficientFamily) -> RealP:
    """Max relative defect of the defining equation over the trajectory.

    Measured at twice the trajectory precision so the check itself adds
    rounding noise far below what it is measuring.
    """
    if len(traj) < 3:
        raise TooShort("residual needs at least 3 trajectory points")
    mp = 2 * traj.precision_bits
    worst: Optional[RealP] = None
    for n in range(1, traj.last_index):
        xm = traj.points[n - 1].with_precision(mp)
        xc = traj.points[n].with_precision(mp)
        xp = traj.points[n + 1].with_precision(mp)
        ell = family.ell(n, mp)
        lhs = xc * (
            family.sigma(n, 1, mp) * xp
            + family.sigma(n, 0, mp) * xc
            + family.sigma(n, -1, mp) * xm
        ) + family.kappa(n, mp) * xc
        defect = abs(ell - lhs) / ell
        if worst is None or defect > worst:
            worst = defect
    return worst


def apriori_upper_bound(family: CoefficientFamily, n: int, prec: int) -> RealP:
    """Quadratic-root bound every positive solution obeys for n >= 2.

    Dropping the two nonnegative neighbour terms from the equation leaves
    sigma(n,0) x_n^2 + kappa(n) x_n <= ell(n); the bound is the positive
    root of that quadratic.
    """
    if not isinstance(n, int) or n < 2:
        raise InvalidParameter(f"bound index must be an int >= 2, got {n!r}")
    s0 = family.sigma(n, 0, prec)
    if s0.is_zero():
        raise InvalidParameter(
            "no quadratic bound when the middle coefficient vanishes"
        )
    k = family.kappa(n, prec)
    disc = k * k + 4 * s0 * family.ell(n, prec)
    return (sqrt_p(disc) - k) / (2 * s0)


def scaled_values(
    traj: Trajectory, family: CoefficientFamily
) -> list[tuple[int, RealP]]:
    """(n, x_n / sqrt(ell(n))) for n = 1..last; ell(0) is undefined."""
    prec = traj.precision_bits
    out = []
    for n in range(1, traj.last_index + 1):
        out.append((n, traj.points[n] / sqrt_p(family.ell(n, prec))))
    return out


def write_trajectory_csv(
    path: str, traj: Trajectory, family: CoefficientFamily
) -> None:
    """Columns n, x_n, t_n with full-precision decimal strings."""
    scaled = dict(scaled_values(traj, family))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("n", "x_n", "t_n"))
        for n, x in enumerate(traj.points):
            t = scaled.get(n)
            w.writerow((n, x.to_decimal(), t.to_decimal() if t is not None else ""))


def read_trajectory_csv(path: str, prec: int, family_id: str = "table") -> Trajectory:
    """Load a trajectory table (columns n, x_n, optional extras)."""
    points: list[RealP] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InvalidParameter(f"{path}: empty file") from None
        cols = [h.strip() for h in header]
        if len(cols) < 2 or cols[0] != "n" or cols[1] != "x_n":
            raise InvalidParameter(f"{path}: header must start with n,x_n")
        expect = 0
        for line in reader:
            if not line or all(not c.strip() for c in line):
                continue
            if int(line[0]) != expect:
                raise InvalidParameter(
                    f"{path}: rows must cover n = 0..N in order; got n = {line[0]}"
                )
            points.append(make_real(line[1].strip(), prec))
            expect += 1
    if len(points) < 2:
        raise TooShort(f"{path}: a trajectory needs at least x_0 and x_1")
    return Trajectory(
        tuple(points),
        prec,
        Termination.completed(len(points) - 2),
        family_id,
    )


def tabulate_solution(
    values: Sequence[Union[RealP, str, int]], prec: int, family_id: str
) -> Trajectory:
    """Wrap externally known solution values x_0.. as a trajectory."""
    if len(values) < 2:
        raise TooShort("a trajectory needs at least x_0 and x_1")
    pts = tuple(make_real(v, prec) for v in values)
    return Trajectory(pts, prec, Termination.completed(len(pts) - 2), family_id)
