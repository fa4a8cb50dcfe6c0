"""Period functionals ``(2 pi i)^{k+1} int_0^{i oo} P(z) f(z) dz`` for Fricke eigenforms.

The path is split at the fixed point ``i/sqrt(N)`` of ``z -> -1/(Nz)``; the
lower half is folded onto the upper one, where every term of the q-expansion
integrates in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from mpmath import libmp

from .aj import ExactScalar
from .errors import ValidationError
from .modforms import Newform, envelope, series_terms
from .numerics import BallComplex, PrecisionContext, ball_mul, real_input, round_exact, to_mpf, up_add, up_mul


def _as_poly(P) -> tuple:
    coeffs = [Fraction(c) for c in P]
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return tuple(coeffs)


def fricke_transform(P, N: int, k: int, eps: int) -> tuple:
    """Coefficients of ``-eps N^{k/2} w^k P(-1/(N w))``.

    The lower leg ``int_0^{i/sqrt N} P f dz`` equals ``int_{i/sqrt N}^{i oo}`` of
    this polynomial times f.  The map is an involution for even k.
    """
    if k % 2:
        raise ValidationError("k must be even", module="periods")
    P = _as_poly(P)
    if len(P) > k + 1:
        raise ValidationError(f"deg P = {len(P) - 1} exceeds k = {k}", module="periods")
    out = [Fraction(0)] * (k + 1)
    half = k // 2
    for j, c in enumerate(P):
        out[k - j] = -eps * (-1) ** j * c * Fraction(N) ** (half - j)
    return _as_poly(out)


def monomial_kernel(m: int, n: int, Y0, ctx: PrecisionContext | None = None, Y_radius=0) -> BallComplex:
    """``int_{Y0}^oo y^m e^{-2 pi n y} dy = e^{-2 pi n Y0} sum_s m!/(m-s)! Y0^{m-s} (2 pi n)^{-(s+1)}``."""
    ctx = ctx or PrecisionContext()
    if m < 0 or n < 1:
        raise ValidationError(f"need m >= 0 and n >= 1, got m={m}, n={n}", module="periods")
    mp = ctx.mp
    wmp = ctx.with_bits(ctx.bits + 16 + 2 * m).mp
    Y, Yerr = real_input(wmp, Y0)
    if not Y > 0:
        raise ValidationError("Y0 must be positive", module="periods")
    a = 2 * wmp.pi * n
    s_sum = wmp.fsum(math.perm(m, s) * Y ** (m - s) / a ** (s + 1) for s in range(m + 1))
    ex = wmp.exp(-a * Y)
    value = ex * s_sum
    center, drift = round_exact(mp, value._mpf_, libmp.fzero)
    rel = (2 * m + 8 + 4 * a * Y) * wmp.ldexp(1, 1 - wmp.prec)
    radius = up_add(mp, drift, up_mul(mp, value, rel))
    delta = up_add(mp, to_mpf(mp, Y_radius), Yerr)
    if delta:
        if a * delta > mp.ldexp(1, -20):
            raise ValidationError("Y0 uncertainty too large", module="periods")
        # |d/dY0| = Y0^m e^{-a Y0}, maximised over [Y0 - delta, Y0 + delta]
        radius = up_add(mp, radius, up_mul(mp, delta, (Y + delta) ** m, wmp.exp(-a * (Y - delta)), 1 + mp.ldexp(1, -18)))
    return BallComplex(center, radius)


@dataclass(frozen=True)
class CuspFunctional:
    P: tuple
    alpha: object
    beta: object
    integral: BallComplex
    value: BallComplex
    folded: tuple


def half_line_integral(f: Newform, C, Y0, ctx: PrecisionContext, Y_radius=0) -> BallComplex:
    """``int_{i Y0}^{i oo} C(z) f(z) dz`` termwise: ``sum_m C_m i^{m+1} sum_n a_n K(m, n, Y0)``."""
    mp = ctx.mp
    C = _as_poly(C)
    Yf = to_mpf(mp, Y0)
    Ce, e = envelope(f)
    decay = mp.exp(-2 * mp.pi * Yf)
    wctx = ctx.with_bits(ctx.bits + 24)
    wmp = wctx.mp
    units = [(1, 0), (0, 1), (-1, 0), (0, -1)]
    re_part, im_part = wmp.mpf(0), wmp.mpf(0)
    rad = wmp.mpf(0)
    if not C:
        return BallComplex(mp.mpc(0), mp.mpf(0))
    for m, cm in enumerate(C):
        if cm == 0:
            continue
        K1 = monomial_kernel(m, 1, Yf, ctx)
        K1_up = up_add(mp, K1.center.real, K1.radius)
        share = ctx.target_eps / (len(C) * to_mpf(mp, abs(cm)))
        M, tail = series_terms(len(f), (Ce, e), decay, share,
                               lambda n: Ce * mp.mpf(n) ** e * K1_up * decay ** (n - 1), f.label)
        coeffs = f.coefficients_mp(wctx)
        s = wmp.mpf(0)
        srad = wmp.mpf(0)
        mag = wmp.mpf(0)
        for n in range(1, M + 1):
            a_n = coeffs[n - 1]
            if a_n == 0:
                continue
            K = monomial_kernel(m, n, Y0, wctx, Y_radius)
            s += a_n * K.center.real
            mag += abs(a_n) * abs(K.center.real)
            srad = up_add(wmp, srad, up_mul(wmp, abs(a_n), K.radius))
        srad = up_add(wmp, srad, tail, up_mul(wmp, mag, M + 4, wmp.ldexp(1, 1 - wmp.prec)))
        cw = wmp.mpf(cm.numerator) / cm.denominator
        term = cw * s
        ur, ui = units[(m + 1) % 4]
        re_part += ur * term
        im_part += ui * term
        rad = up_add(wmp, rad, up_mul(wmp, abs(cw), srad), up_mul(wmp, abs(term), wmp.ldexp(4, -wmp.prec)))
    center, drift = round_exact(mp, *wmp.mpc(re_part, im_part)._mpc_)
    return BallComplex(center, up_add(mp, rad, drift))


def j_functional(f: Newform, P, ctx: PrecisionContext | None = None) -> CuspFunctional:
    """``(2 pi i)^{k+1} int_0^{i oo} P(z) f(z) dz`` via the Fricke fold at ``i/sqrt(N)``.

    Needs a trivial-character newform with known Fricke eigenvalue.  ``P``
    lists coefficients from the constant term up; rationals are allowed.
    """
    ctx = ctx or PrecisionContext()
    if f.fricke is None:
        raise ValidationError(f"{f.label}: Fricke eigenvalue required", module="periods", code="fricke")
    k = f.k
    P = _as_poly(P)
    if len(P) > k + 1:
        raise ValidationError(f"deg P = {len(P) - 1} exceeds k = {k}", module="periods")
    Pt = fricke_transform(P, f.level, k, f.fricke)
    n = max(len(P), len(Pt))
    folded = _as_poly([(P[i] if i < len(P) else 0) + (Pt[i] if i < len(Pt) else 0) for i in range(n)])
    wctx = ctx.with_bits(ctx.bits + 16)
    wmp = wctx.mp
    Y0 = 1 / wmp.sqrt(f.level)
    integral = half_line_integral(f, folded, Y0, wctx, Y_radius=Y0 * wmp.ldexp(4, -wmp.prec))
    pref = ExactScalar(Fraction(2 ** (k + 1)), k + 1, k + 1).ball(wctx)
    value = ball_mul(pref, integral, wctx)
    mp = ctx.mp

    def down(b):
        c, drift = round_exact(mp, *b.center._mpc_)
        return BallComplex(c, up_add(mp, b.radius, drift))

    return CuspFunctional(P, 0, math.inf, down(integral), down(value), folded)
