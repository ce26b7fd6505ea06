"""Independent reference values for the quartic-weight family.

The coefficient family with ell(n) = n (+ rho on odd n), constant side
and middle weights c, and constant kappa = K is the three-term
recurrence of orthogonal polynomials for the weight

    w(x) = |x|^rho * exp(-(c/4) x^4 - (K/2) x^2)   on the real line.

Its n = 1 recurrence value is the moment ratio

    x_1 = m_2 / m_0,    m_s = integral of x^s w(x) dx over [0, inf).

This module evaluates that ratio two ways that share nothing with the
difference-equation solver: a Gamma-function closed form when K = 0,
and double-exponential (tanh-sinh) quadrature of the moment integrals
for general (c, K, rho).  Either route gives an external check on the
shooting solver's x_1.

Normalization trap: under the alternative convention exp(-c x^4) the
same ratio is exactly half the value here (substitute x -> x / sqrt(2)
with c fixed).  The (c/4, K/2) scaling is the one matched to
ell(n) = n with side weights c; the self-consistency check
x_1 * (x_1 + x_2) = 1 at c = 1, K = 0 pins it down.

Quadrature scheme: x = mid + half*tanh((pi/2) sinh t) with weight
half*(pi/2) cosh t / cosh^2((pi/2) sinh t), truncated at the smallest
integer t with (pi/2) sinh t >= (wp + 16) ln 2.  Levels halve the step,
reusing prior nodes (only odd multiples of the new step are fresh), and
stop when every component integral agrees with its previous level to
the target relative tolerance.  A power-law endpoint factor x^rho with
-1 < rho < 0 is integrable but unbounded, so [0, 1] is transformed by
u = x^(1+rho) (exact: x^rho dx = du / (1+rho)), which makes the
integrand smooth; [1, R] needs no help.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

import gmpy2
from gmpy2 import mpfr

from .coefficients import _fraction
from .errors import InvalidParameter, NoConvergence
from .precision import MIN_PRECISION, RealP, _ctx, gamma_p, make_real

MAX_LEVEL = 14


def _absv(ctx, x):
    # builtin abs() on a raw backend value rounds at the thread-default
    # precision, not ours; sign flip at ctx precision is exact
    return ctx.minus(x) if gmpy2.sign(x) < 0 else x


@dataclass(frozen=True)
class QuadratureResult:
    value: RealP
    est_error: RealP
    levels: int
    nodes: int
    cutoff: RealP


def freud_x1_closed_form(prec: int) -> RealP:
    """2 Gamma(3/4) / Gamma(1/4) at c = 1, K = 0, rho = 0."""
    wp = prec + 32
    g34 = gamma_p(make_real("0.75", wp))
    g14 = gamma_p(make_real("0.25", wp))
    return (2 * g34 / g14).with_precision(prec)


def freud_x1_rho_closed_form(rho: Union[str, int], prec: int) -> RealP:
    """2 Gamma((3+rho)/4) / Gamma((1+rho)/4) at c = 1, K = 0.

    Follows from m_s = 4**((s+rho-3)/4) Gamma((s+rho+1)/4) for the
    weight x^rho exp(-x^4/4) on [0, inf)."""
    if _fraction(rho, "rho") <= -1:
        raise InvalidParameter(f"rho must be > -1, got {rho!r}")
    wp = prec + 32
    r = make_real(rho, wp)
    num = gamma_p((3 + r) / 4)
    den = gamma_p((1 + r) / 4)
    return (2 * num / den).with_precision(prec)


def _tol_bits(prec: int, tol: Optional[str]) -> int:
    if tol is None:
        return prec + 8
    t = make_real(tol, 64)
    if t.sign() <= 0:
        raise InvalidParameter(f"tol must be > 0, got {tol!r}")
    m, e = t.as_mantissa_exp()
    return max(-(e + m.bit_length()) + 1, 16)


def _integer_cutoff(ctx, wp: int) -> int:
    """Smallest integer T with (pi/2) sinh T >= (wp + 16) ln 2."""
    target = ctx.mul(ctx.log(mpfr(2, wp)), mpfr(wp + 16, wp))
    pi_half = ctx.div(ctx.const_pi(), mpfr(2, wp))
    t = 1
    while ctx.mul(pi_half, ctx.sinh(mpfr(t, wp))) < target:
        t += 1
    return t


def _freud_cutoff(ctx, wp: int, cv, kv, tol_bits: int):
    """R with (c/4) R^4 + (K/2) R^2 = L, so the tail beyond R is < e^-L.

    L = ln 10 + tol_bits ln 2 + 15 keeps the discarded mass far below
    the requested tolerance; R is clamped to >= 2 so the interval split
    at 1 stays valid even when a large positive K would allow less."""
    ln2 = ctx.log(mpfr(2, wp))
    big_l = ctx.add(
        ctx.add(ctx.mul(ln2, mpfr(tol_bits, wp)), ctx.log(mpfr(10, wp))),
        mpfr(15, wp),
    )
    disc = ctx.sqrt(
        ctx.add(ctx.mul(kv, kv), ctx.mul(mpfr(4, wp), ctx.mul(cv, big_l)))
    )
    if gmpy2.sign(kv) >= 0:
        # (-K + disc)/c == 4L/(disc + K): no cancellation this way round
        y = ctx.div(ctx.mul(mpfr(4, wp), big_l), ctx.add(disc, kv))
    else:
        y = ctx.div(ctx.sub(disc, kv), cv)
    r = ctx.sqrt(y)
    two = mpfr(2, wp)
    return r if r > two else two


def _tanh_sinh_multi(
    ctx,
    wp: int,
    fs: tuple[Callable, ...],
    a,
    b,
    tol_bits: int,
) -> tuple[list, list, int, int]:
    """Integrate every f in fs over [a, b] on one shared node set.

    Returns (values, per-component error estimates, final level, number
    of abscissas evaluated).  The error estimate is the last
    level-to-level change plus a rounding floor."""
    half = ctx.div(ctx.sub(b, a), mpfr(2, wp))
    mid = ctx.div(ctx.add(b, a), mpfr(2, wp))
    pi_half = ctx.div(ctx.const_pi(), mpfr(2, wp))
    tmax = _integer_cutoff(ctx, wp)
    tiny = ctx.exp2(mpfr(-(wp + 48), wp))
    eps = ctx.exp2(mpfr(-tol_bits, wp))
    nf = len(fs)

    def contribution(t):
        u = ctx.mul(pi_half, ctx.sinh(t))
        ch = ctx.cosh(u)
        w = ctx.div(
            ctx.mul(ctx.mul(half, pi_half), ctx.cosh(t)), ctx.mul(ch, ch)
        )
        dx = ctx.mul(half, ctx.tanh(u))
        return ctx.add(mid, dx), ctx.sub(mid, dx), w

    nodes = 1
    x0, _, w0 = contribution(mpfr(0, wp))
    sums = [ctx.mul(w0, f(x0)) for f in fs]
    for k in range(1, tmax + 1):
        xp, xm, w = contribution(mpfr(k, wp))
        if w < tiny:
            break
        nodes += 2
        for i in range(nf):
            sums[i] = ctx.add(sums[i], ctx.mul(w, ctx.add(fs[i](xp), fs[i](xm))))
    prev = list(sums)  # I at level 0: h = 1

    level = 0
    deltas = [mpfr(0, wp)] * nf
    for level in range(1, MAX_LEVEL + 1):
        h = ctx.exp2(mpfr(-level, wp))
        j = 1
        jmax = tmax << level
        while j <= jmax:
            t = ctx.mul(h, mpfr(j, wp))
            xp, xm, w = contribution(t)
            if w < tiny:
                break
            nodes += 2
            for i in range(nf):
                sums[i] = ctx.add(
                    sums[i], ctx.mul(w, ctx.add(fs[i](xp), fs[i](xm)))
                )
            j += 2
        cur = [ctx.mul(h, s) for s in sums]
        deltas = [_absv(ctx, ctx.sub(cur[i], prev[i])) for i in range(nf)]
        prev = cur
        if level >= 2 and all(
            deltas[i] <= ctx.mul(eps, _absv(ctx, cur[i])) for i in range(nf)
        ):
            break
    if level == MAX_LEVEL and not all(
        deltas[i] <= ctx.mul(eps, _absv(ctx, prev[i])) for i in range(nf)
    ):
        worst = max(
            float(ctx.div(deltas[i], _absv(ctx, prev[i]))) for i in range(nf)
        )
        raise NoConvergence(
            f"quadrature levels exhausted at {MAX_LEVEL}; "
            f"worst relative level-to-level change {worst:.3e}"
        )
    floor = ctx.exp2(mpfr(-(wp - 8), wp))
    ests = [
        ctx.add(deltas[i], ctx.mul(floor, _absv(ctx, prev[i])))
        for i in range(nf)
    ]
    return prev, ests, level, nodes


def _exp_neg_v(ctx, wp, cv, kv):
    """x -> exp(-(c/4) x^4 - (K/2) x^2)."""
    c4 = ctx.div(cv, mpfr(4, wp))
    k2 = ctx.div(kv, mpfr(2, wp))

    def f(x):
        x2 = ctx.mul(x, x)
        return ctx.exp(
            ctx.minus(ctx.add(ctx.mul(c4, ctx.mul(x2, x2)), ctx.mul(k2, x2)))
        )

    return f


def _finish(ctx, wp, prec, num, den, est_num, est_den, levels, nodes, r):
    x1 = ctx.div(num, den)
    rel = ctx.add(
        ctx.div(est_num, _absv(ctx, num)), ctx.div(est_den, _absv(ctx, den))
    )
    est = ctx.mul(_absv(ctx, x1), rel)
    return QuadratureResult(
        value=RealP._raw(x1, wp).with_precision(prec),
        est_error=RealP._raw(est, wp).with_precision(prec),
        levels=levels,
        nodes=nodes,
        cutoff=RealP._raw(r, wp).with_precision(prec),
    )


def x1_quadrature(
    c: Union[str, int] = "1",
    K: Union[str, int] = "0",
    prec: int = 192,
    tol: Optional[str] = None,
) -> QuadratureResult:
    """Moment ratio m_2 / m_0 for exp(-(c/4)x^4 - (K/2)x^2) by quadrature."""
    if _fraction(c, "c") <= 0:
        raise InvalidParameter(f"c must be > 0, got {c!r}")
    if prec < MIN_PRECISION:
        raise InvalidParameter(f"prec must be >= {MIN_PRECISION}")
    tb = _tol_bits(prec, tol)
    wp = max(prec, tb) + 64
    ctx = _ctx(wp)
    cv = mpfr(str(c).strip(), wp)
    kv = mpfr(str(K).strip(), wp)
    r = _freud_cutoff(ctx, wp, cv, kv, tb)
    ev = _exp_neg_v(ctx, wp, cv, kv)

    def num_f(x):
        return ctx.mul(ctx.mul(x, x), ev(x))

    (den, num), (est_d, est_n), levels, nodes = _tanh_sinh_multi(
        ctx, wp, (ev, num_f), mpfr(0, wp), r, tb
    )
    return _finish(ctx, wp, prec, num, den, est_n, est_d, levels, nodes, r)


def x1_quadrature_rho(
    rho: Union[str, int],
    c: Union[str, int] = "1",
    K: Union[str, int] = "0",
    prec: int = 192,
    tol: Optional[str] = None,
) -> QuadratureResult:
    """Moment ratio with the extra |x|^rho factor, rho > -1.

    rho = 0 delegates to the plain routine; rho in (-1, 0) integrates
    [0, 1] in the substituted variable u = x^(1+rho) and [1, R]
    directly, summing the pieces before taking the ratio."""
    rho_exact = _fraction(rho, "rho")
    if rho_exact <= -1:
        raise InvalidParameter(f"rho must be > -1, got {rho!r}")
    if rho_exact == 0:
        return x1_quadrature(c, K, prec, tol)
    if _fraction(c, "c") <= 0:
        raise InvalidParameter(f"c must be > 0, got {c!r}")
    if prec < MIN_PRECISION:
        raise InvalidParameter(f"prec must be >= {MIN_PRECISION}")
    tb = _tol_bits(prec, tol)
    wp = max(prec, tb) + 64
    ctx = _ctx(wp)
    cv = mpfr(str(c).strip(), wp)
    kv = mpfr(str(K).strip(), wp)
    rv = mpfr(str(rho).strip(), wp)
    r = _freud_cutoff(ctx, wp, cv, kv, tb)
    ev = _exp_neg_v(ctx, wp, cv, kv)
    one = mpfr(1, wp)
    zero = mpfr(0, wp)

    if rho_exact > 0:

        def den_f(x):
            return ctx.mul(ctx.pow(x, rv), ev(x))

        def num_f(x):
            return ctx.mul(ctx.pow(x, ctx.add(rv, mpfr(2, wp))), ev(x))

        (den, num), (est_d, est_n), levels, nodes = _tanh_sinh_multi(
            ctx, wp, (den_f, num_f), zero, r, tb
        )
        return _finish(ctx, wp, prec, num, den, est_n, est_d, levels, nodes, r)

    # -1 < rho < 0: u = x^(1+rho) on [0, 1] removes the endpoint blow-up
    alpha = ctx.div(one, ctx.add(one, rv))  # dx-side exponent, > 1
    two_alpha = ctx.mul(mpfr(2, wp), alpha)

    def den_a(u):
        return ctx.mul(alpha, ev(ctx.pow(u, alpha)))

    def num_a(u):
        return ctx.mul(
            ctx.mul(alpha, ctx.pow(u, two_alpha)), ev(ctx.pow(u, alpha))
        )

    def den_b(x):
        return ctx.mul(ctx.pow(x, rv), ev(x))

    def num_b(x):
        return ctx.mul(ctx.pow(x, ctx.add(rv, mpfr(2, wp))), ev(x))

    (den1, num1), (ed1, en1), lv1, nd1 = _tanh_sinh_multi(
        ctx, wp, (den_a, num_a), zero, one, tb
    )
    (den2, num2), (ed2, en2), lv2, nd2 = _tanh_sinh_multi(
        ctx, wp, (den_b, num_b), one, r, tb
    )
    den = ctx.add(den1, den2)
    num = ctx.add(num1, num2)
    est_d = ctx.add(ed1, ed2)
    est_n = ctx.add(en1, en2)
    return _finish(
        ctx, wp, prec, num, den, est_n, est_d, max(lv1, lv2), nd1 + nd2, r
    )
