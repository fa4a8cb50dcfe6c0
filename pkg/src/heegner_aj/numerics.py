"""Complex balls at runtime-selected precision, and an adaptive quadrature oracle.

Each :class:`PrecisionContext` owns a private ``mpmath.MPContext`` so that
computations running in different threads never share the global mpmath
precision.  Ball radii are accumulated with upward-rounded ``libmp``
operations; for addition and multiplication the rounding error of the centre
is computed exactly rather than estimated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Union

from mpmath import MPContext, libmp

from .errors import PrecisionExhausted, ToleranceNotMet, ValidationError

_UP = libmp.round_ceiling
_NEAR = libmp.round_nearest
_ZERO = libmp.fzero

# |Re z| beyond which exp(z) is refused.
EXP_ARG_LIMIT = 2**24
# binary exponent beyond which a radius or centre is treated as overflow.
MAX_EXPONENT = 2**40

Number = Union[int, float, complex, Fraction, str, object]


@dataclass(frozen=True)
class PrecisionContext:
    """Working mantissa size and requested absolute error.

    ``target_eps`` defaults to ``2**(8 - bits)``.
    """

    bits: int = 128
    target_eps: object = None
    mp: MPContext = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.bits) != self.bits or self.bits < 53:
            raise ValidationError(f"bits must be an integer >= 53, got {self.bits}", module="numerics")
        mp = MPContext()
        mp.prec = int(self.bits)
        object.__setattr__(self, "mp", mp)
        if self.target_eps is None:
            eps = mp.ldexp(1, 8 - self.bits)
        else:
            eps = to_mpf(mp, self.target_eps)
        if not eps > 0:
            raise ValidationError("target_eps must be positive", module="numerics")
        if eps < mp.ldexp(1, 1 - self.bits):
            raise ValidationError(
                f"target_eps={mp.nstr(eps, 5)} is below 2^(1-bits) for bits={self.bits}",
                module="numerics",
            )
        object.__setattr__(self, "target_eps", eps)

    def with_bits(self, bits: int) -> "PrecisionContext":
        eps = self.target_eps
        floor = libmp.from_man_exp(1, 1 - bits)
        if libmp.mpf_lt(eps._mpf_, floor):
            eps = self.mp.make_mpf(floor)
        return PrecisionContext(bits, eps)

    def with_eps(self, eps) -> "PrecisionContext":
        return PrecisionContext(self.bits, eps)

    def relative(self, scale, rel_bits: int | None = None) -> "PrecisionContext":
        """Context whose target error is ``|scale| * 2**-rel_bits``.

        Bits are raised as needed so the absolute target stays representable.
        """
        if rel_bits is None:
            rel_bits = self.bits - 8
        mp = self.mp
        scale = abs(to_mpf(mp, scale))
        if scale == 0:
            raise ValidationError("relative context needs a nonzero scale", module="numerics")
        eps = mp.ldexp(scale, -rel_bits)
        need = rel_bits + 8 - int(mp.floor(mp.log(scale, 2)))
        return PrecisionContext(max(self.bits, need), eps)

    def ulp(self, k: int = 0):
        """``2**(k - bits)``"""
        return self.mp.ldexp(1, k - self.bits)


def to_mpf(mp: MPContext, x):
    """Convert ints, floats, decimal strings, Fractions and mpf of any context."""
    if isinstance(x, Fraction):
        return mp.mpf(x.numerator) / x.denominator
    if hasattr(x, "_mpf_"):
        return mp.make_mpf(libmp.mpf_pos(x._mpf_, mp.prec, _NEAR))
    return mp.mpf(x)


def to_mpc(mp: MPContext, z):
    if hasattr(z, "_mpc_"):
        re, im = z._mpc_
        return mp.make_mpc((libmp.mpf_pos(re, mp.prec, _NEAR), libmp.mpf_pos(im, mp.prec, _NEAR)))
    if isinstance(z, complex):
        return mp.mpc(z)
    return mp.mpc(to_mpf(mp, z))


def exact_fraction(x) -> Fraction:
    """Exact rational value of an int, Fraction, float or binary mpf."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, float)):
        return Fraction(x)
    if hasattr(x, "_mpf_"):
        p, q = libmp.to_rational(x._mpf_)
        return Fraction(p, q)
    return Fraction(str(x))


def real_input(mp, x):
    """``(value, radius)`` for a real input: binary numbers are exact, rationals get rounded."""
    if isinstance(x, Fraction):
        v = to_mpf(mp, x)
        err = abs(exact_fraction(v) - x)
        return v, mp.mpf(err.numerator) / err.denominator * 2 if err else mp.mpf(0)
    if isinstance(x, str):
        return real_input(mp, Fraction(x))
    v = to_mpf(mp, x)
    if hasattr(x, "_mpf_"):
        diff = libmp.mpf_abs(libmp.mpf_sub(x._mpf_, v._mpf_))
        return v, up_add(mp, mp.make_mpf(diff))
    return v, mp.mpf(0)


def _exact_parts(z):
    """Exact (re, im) libmp tuples of a binary number."""
    if hasattr(z, "_mpc_"):
        return z._mpc_
    if hasattr(z, "_mpf_"):
        return z._mpf_, _ZERO
    if isinstance(z, bool):
        z = int(z)
    if isinstance(z, int):
        return libmp.from_int(z), _ZERO
    if isinstance(z, float):
        return libmp.from_float(z), _ZERO
    if isinstance(z, complex):
        return libmp.from_float(z.real), libmp.from_float(z.imag)
    raise TypeError(f"cannot take exact parts of {type(z).__name__}")


def _check_finite(t, what="value"):
    if t in (libmp.finf, libmp.fninf, libmp.fnan):
        raise PrecisionExhausted(f"{what} is not finite")
    if t != _ZERO and abs(t[2] + t[3]) > MAX_EXPONENT:
        raise PrecisionExhausted(f"{what} left the exponent range")


def up_add(mp, *xs):
    acc = _ZERO
    for x in xs:
        acc = libmp.mpf_add(acc, _exact_parts(x)[0], mp.prec, _UP)
    return mp.make_mpf(acc)


def up_mul(mp, *xs):
    acc = libmp.fone
    for x in xs:
        acc = libmp.mpf_mul(acc, _exact_parts(x)[0], mp.prec, _UP)
    return mp.make_mpf(acc)


def abs_upper(mp, z):
    """Upper bound |re| + |im| >= |z|, rounded up."""
    re, im = _exact_parts(z)
    return mp.make_mpf(libmp.mpf_add(libmp.mpf_abs(re), libmp.mpf_abs(im), mp.prec, _UP))


def round_exact(mp, exact_re, exact_im):
    """Round an exact complex value; return (mpc, upper bound on |rounding error|)."""
    re = libmp.mpf_pos(exact_re, mp.prec, _NEAR)
    im = libmp.mpf_pos(exact_im, mp.prec, _NEAR)
    err_re = libmp.mpf_abs(libmp.mpf_sub(exact_re, re))
    err_im = libmp.mpf_abs(libmp.mpf_sub(exact_im, im))
    err = libmp.mpf_add(err_re, err_im, mp.prec, _UP)
    _check_finite(re, "centre")
    _check_finite(im, "centre")
    return mp.make_mpc((re, im)), mp.make_mpf(err)


@dataclass(frozen=True)
class BallComplex:
    """Complex ball: every true value lies within ``radius`` of ``center``."""

    center: object
    radius: object

    @property
    def real(self):
        return self.center.real

    @property
    def imag(self):
        return self.center.imag

    def contains(self, z) -> bool:
        """Exact test of ``|z - center| <= radius``."""
        zr, zi = _exact_parts(z)
        cr, ci = _exact_parts(self.center)
        dr = libmp.mpf_sub(zr, cr)
        di = libmp.mpf_sub(zi, ci)
        lhs = libmp.mpf_add(libmp.mpf_mul(dr, dr), libmp.mpf_mul(di, di))
        r = self.radius._mpf_
        return libmp.mpf_le(lhs, libmp.mpf_mul(r, r))

    def contains_ball(self, other: "BallComplex") -> bool:
        """Conservative containment test (rounded upward)."""
        mp = MPContext()
        mp.prec = 4 * max(_bits_of(self.radius), _bits_of(other.radius), 64)
        gap = abs_upper(mp, _exact_diff(other.center, self.center))
        return libmp.mpf_le(up_add(mp, gap, other.radius)._mpf_, self.radius._mpf_)

    def overlaps(self, other: "BallComplex") -> bool:
        dr, di = _exact_diff(self.center, other.center)._mpc_
        lhs = libmp.mpf_add(libmp.mpf_mul(dr, dr), libmp.mpf_mul(di, di))
        rr = libmp.mpf_add(self.radius._mpf_, other.radius._mpf_)
        return libmp.mpf_le(lhs, libmp.mpf_mul(rr, rr))

    def inflate(self, factor) -> "BallComplex":
        return BallComplex(self.center, self.radius * factor)

    def abs_upper(self):
        mp = MPContext()
        mp.prec = 64
        return up_add(mp, abs_upper(mp, self.center), self.radius)

    def __str__(self):
        return f"({self.center} +/- {libmp.to_str(self.radius._mpf_, 5)})"


def _bits_of(x):
    t = _exact_parts(x)[0]
    return t[3] if t != _ZERO else 0


class _Exact:
    def __init__(self, re, im):
        self._mpc_ = (re, im)


def _exact_diff(a, b):
    ar, ai = _exact_parts(a)
    br, bi = _exact_parts(b)
    return _Exact(libmp.mpf_sub(ar, br), libmp.mpf_sub(ai, bi))


def as_ball(x, ctx: PrecisionContext) -> BallComplex:
    """Promote a number to a ball; inexact conversions get a one-ulp radius."""
    if isinstance(x, BallComplex):
        return x
    mp = ctx.mp
    if isinstance(x, (int, float, complex)) or hasattr(x, "_mpf_") or hasattr(x, "_mpc_"):
        re, im = _exact_parts(x)
        c, err = round_exact(mp, re, im)
        return BallComplex(c, err)
    if isinstance(x, Fraction):
        c = to_mpc(mp, x)
        return BallComplex(c, up_mul(mp, abs_upper(mp, c), mp.ldexp(1, 1 - mp.prec)))
    c = to_mpc(mp, x)
    return BallComplex(c, up_mul(mp, abs_upper(mp, c), mp.ldexp(1, 1 - mp.prec)))


def ball_add(x, y, ctx: PrecisionContext) -> BallComplex:
    mp = ctx.mp
    x, y = as_ball(x, ctx), as_ball(y, ctx)
    xr, xi = x.center._mpc_
    yr, yi = y.center._mpc_
    c, err = round_exact(mp, libmp.mpf_add(xr, yr), libmp.mpf_add(xi, yi))
    r = up_add(mp, x.radius, y.radius, err)
    _check_finite(r._mpf_, "radius")
    return BallComplex(c, r)


def ball_neg(x: BallComplex) -> BallComplex:
    return BallComplex(-x.center, x.radius)


def ball_sub(x, y, ctx: PrecisionContext) -> BallComplex:
    return ball_add(x, ball_neg(as_ball(y, ctx)), ctx)


def ball_mul(x, y, ctx: PrecisionContext) -> BallComplex:
    mp = ctx.mp
    x, y = as_ball(x, ctx), as_ball(y, ctx)
    a, b = x.center._mpc_
    c, d = y.center._mpc_
    re = libmp.mpf_sub(libmp.mpf_mul(a, c), libmp.mpf_mul(b, d))
    im = libmp.mpf_add(libmp.mpf_mul(a, d), libmp.mpf_mul(b, c))
    center, err = round_exact(mp, re, im)
    ax = abs_upper(mp, x.center)
    ay = abs_upper(mp, y.center)
    r = up_add(mp, up_mul(mp, ax, y.radius), up_mul(mp, ay, x.radius), up_mul(mp, x.radius, y.radius), err)
    _check_finite(r._mpf_, "radius")
    return BallComplex(center, r)


def ball_exp(x, ctx: PrecisionContext) -> BallComplex:
    mp = ctx.mp
    x = as_ball(x, ctx)
    re = x.center.real
    if abs(re) > EXP_ARG_LIMIT:
        raise PrecisionExhausted(f"exp argument with real part {mp.nstr(re, 8)} exceeds the exponent range")
    if x.center == 0 and x.radius == 0:
        return BallComplex(mp.mpc(1), mp.mpf(0))
    c = mp.exp(x.center)
    size = up_mul(mp, abs_upper(mp, c), 1 + mp.ldexp(1, 4 - mp.prec))
    # |e^z - e^c| <= |e^c| (e^r - 1) for |z - c| <= r
    spread = up_mul(mp, size, mp.expm1(x.radius), 1 + mp.ldexp(1, 4 - mp.prec))
    rounding = up_mul(mp, size, mp.ldexp(1, 3 - mp.prec))
    r = up_add(mp, spread, rounding)
    _check_finite(r._mpf_, "radius")
    return BallComplex(c, r)


def ball_sum(terms, ctx: PrecisionContext) -> BallComplex:
    acc = BallComplex(ctx.mp.mpc(0), ctx.mp.mpf(0))
    for t in terms:
        acc = ball_add(acc, t, ctx)
    return acc


# ---------------------------------------------------------------------------
# quadrature


@lru_cache(maxsize=64)
def _gauss_legendre(n: int, bits: int):
    """Nodes and weights on [-1, 1] as libmp tuples; ``n`` must be even."""
    mp = MPContext()
    mp.prec = bits + 32
    nodes, weights = [], []
    for i in range(1, n // 2 + 1):
        x = mp.cos(mp.pi * (i - mp.mpf(1) / 4) / (n + mp.mpf(1) / 2))
        for _ in range(100):
            p0, p1 = mp.mpf(1), x
            for k in range(2, n + 1):
                p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
            dp = n * (x * p1 - p0) / (x * x - 1)
            dx = p1 / dp
            x -= dx
            if abs(dx) < mp.ldexp(1, -bits - 24):
                break
        p0, p1 = mp.mpf(1), x
        for k in range(2, n + 1):
            p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
        dp = n * (x * p1 - p0) / (x * x - 1)
        w = 2 / ((1 - x * x) * dp * dp)
        nodes += [x, -x]
        weights += [w, w]
    return tuple(v._mpf_ for v in nodes), tuple(v._mpf_ for v in weights)


def power_exp_tail(m: int, rate, T, ctx: PrecisionContext):
    """Upper bound for the integral of y^m exp(-rate*y) over [T, oo), T > 0."""
    mp = ctx.mp
    rate, T = to_mpf(mp, rate), to_mpf(mp, T)
    s = mp.mpf(0)
    fall = mp.mpf(1)
    for j in range(m + 1):
        s += fall * T ** (m - j) / rate ** (j + 1)
        fall *= m - j
    return up_mul(mp, s, mp.exp(-rate * T), 1 + mp.ldexp(1, 6 - mp.prec) * (m + 4))


class _Rule:
    def __init__(self, g, ctx: PrecisionContext, order: int):
        mp = ctx.mp
        self.g, self.ctx, self.mp = g, ctx, mp
        xs, ws = _gauss_legendre(order, ctx.bits)
        self.xs = [mp.make_mpf(t) for t in xs]
        self.ws = [mp.make_mpf(t) for t in ws]
        self.evals = 0
        self.slack = mp.ldexp(order + 8, 1 - mp.prec)

    def __call__(self, a, b):
        """(centre, propagated radius) of the rule on [a, b]."""
        mp = self.mp
        half = (b - a) / 2
        mid = (a + b) / 2
        total = mp.mpc(0)
        rad = mp.mpf(0)
        mag = mp.mpf(0)
        for x, w in zip(self.xs, self.ws):
            v = self.g(mid + half * x)
            if isinstance(v, BallComplex):
                rad += w * v.radius
                v = v.center
            v = to_mpc(mp, v)
            total += w * v
            mag += w * (abs(v.real) + abs(v.imag))
        self.evals += len(self.xs)
        rad = up_add(mp, up_mul(mp, rad, half), up_mul(mp, mag, half, self.slack))
        return total * half, rad


def quad_adaptive(
    g: Callable,
    a,
    b,
    tail_bound=0,
    ctx: PrecisionContext | None = None,
    *,
    cutoff=None,
    order: int | None = None,
    max_intervals: int = 4000,
) -> BallComplex:
    """Integrate ``g`` over ``[a, b]`` by adaptive bisection of a Gauss-Legendre rule.

    Parameters
    ----------
    g : callable
        Maps a real ``mpf`` to a number or :class:`BallComplex`.
    a, b : real
        Limits; ``b`` may be ``math.inf``.
    tail_bound : real or callable
        For an infinite upper limit, a bound on the integral beyond the
        truncation point.  A callable ``T -> bound`` lets the routine pick
        the truncation point itself; otherwise ``cutoff`` must be given.
    ctx : PrecisionContext
        ``ctx.target_eps`` is the absolute error aimed for.

    Returns
    -------
    BallComplex
        Radius is the summed local error estimates, the integrand radii,
        a rounding allowance and the tail bound.

    Raises
    ------
    ToleranceNotMet
        If the estimate exceeds ``ctx.target_eps`` once ``max_intervals``
        subintervals have been spent.
    """
    ctx = ctx or PrecisionContext()
    mp = ctx.mp
    eps = ctx.target_eps
    a = to_mpf(mp, a)
    infinite = b == math.inf or (hasattr(b, "_mpf_") and mp.isinf(b))
    tail = mp.mpf(0)
    if infinite:
        if callable(tail_bound):
            T = a + 1
            while True:
                tail = to_mpf(mp, tail_bound(T))
                if tail <= eps / 8:
                    break
                T = a + 2 * (T - a)
                if T - a > 2**20:
                    raise ToleranceNotMet("tail bound never falls below tolerance", best=None, radius=tail)
            b = T
        else:
            if cutoff is None:
                raise ValidationError("infinite upper limit needs a cutoff or callable tail bound", module="numerics")
            tail = to_mpf(mp, tail_bound)
            b = to_mpf(mp, cutoff)
    else:
        b = to_mpf(mp, b)
        if tail_bound and not callable(tail_bound):
            tail = to_mpf(mp, tail_bound)
    if tail > eps:
        raise ToleranceNotMet("tail bound alone exceeds target_eps", best=None, radius=tail)
    if order is None:
        order = max(12, ctx.bits // 6)
    order += order % 2
    rule = _Rule(g, ctx, order)
    length = b - a
    budget = (eps - tail) / 2

    center = mp.mpc(0)
    radius = tail
    stack = [(a, b, rule(a, b))]
    intervals = 0
    while stack:
        lo, hi, whole = stack.pop()
        mid = (lo + hi) / 2
        left, right = rule(lo, mid), rule(mid, hi)
        refined = left[0] + right[0]
        diff = abs(whole[0] - refined)
        intervals += 1
        local = budget * (hi - lo) / length
        if diff <= local or hi - lo < length * mp.ldexp(1, -60):
            center += refined
            radius = up_add(mp, radius, diff, left[1], right[1])
            continue
        if intervals >= max_intervals:
            rest = center + refined + sum((w[0] for _, _, w in stack), mp.mpc(0))
            best = BallComplex(rest, up_add(mp, radius, diff, *[abs(w[0]) for _, _, w in stack]))
            raise ToleranceNotMet(
                f"quadrature stopped after {intervals} intervals", best=best, radius=best.radius
            )
        stack.append((mid, hi, right))
        stack.append((lo, mid, left))
    radius = up_add(mp, radius, up_mul(mp, abs_upper(mp, center), mp.ldexp(intervals + 4, 1 - mp.prec)))
    if radius > eps:
        raise ToleranceNotMet(
            f"radius {mp.nstr(radius, 5)} above target {mp.nstr(eps, 5)}",
            best=BallComplex(center, radius),
            radius=radius,
        )
    return BallComplex(center, radius)
