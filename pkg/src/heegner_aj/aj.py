"""The Heegner line integral and the Abel-Jacobi representative built from it."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from mpmath import libmp

from .errors import ValidationError
from .isogeny import CMPoint
from .modforms import DEFAULT_Y_MIN, Newform, envelope, series_terms
from .numerics import (
    BallComplex,
    PrecisionContext,
    ball_mul,
    exact_fraction,
    real_input,
    round_exact,
    to_mpf,
    up_add,
    up_mul,
)
from .quadfield import FieldElement


def _closed_form_terms(r: int, a, Y, mp):
    """Terms of the double sum, without the exponential factor."""
    terms = []
    for j in range(r + 1):
        sign = -1 if (r - j) % 2 else 1
        binom = math.comb(r, j)
        for s in range(2 * j + 1):
            coef = sign * binom * (math.factorial(2 * j) // math.factorial(2 * j - s))
            terms.append(coef * Y ** (2 * r - s) / a ** (s + 1))
    return terms


def kernel_integral(r: int, n: int, Y, ctx: PrecisionContext | None = None, Y_radius=0) -> BallComplex:
    """``E(r, n, Y)``, the integral of ``(y^2 - Y^2)^r e^{-2 pi n y}`` over ``[Y, oo)``.

    Evaluated by the finite closed form obtained from repeated integration by
    parts.  The double sum cancels heavily when ``2 pi n Y`` is large, so it is
    summed with enough guard bits that the relative error stays at the
    context precision.

    Parameters
    ----------
    r, n : int
        ``r >= 0``, ``n >= 1``.
    Y : real
        Lower limit ``>= 0``.  Binary numbers are exact; rationals are rounded
        and the rounding error is folded in.
    Y_radius : real
        Uncertainty of ``Y``; propagated through ``|dE/dY| = 2 r Y E(r-1, n, Y)``.

    Returns
    -------
    BallComplex
        Real-valued ball.
    """
    ctx = ctx or PrecisionContext()
    if r < 0 or n < 1:
        raise ValidationError(f"need r >= 0 and n >= 1, got r={r}, n={n}", module="aj")
    mp = ctx.mp
    guard = 16 + 4 * r
    while True:
        wp = ctx.bits + guard
        wmp = ctx.with_bits(wp).mp
        Yw, Yerr = real_input(wmp, Y)
        if Yw < 0:
            raise ValidationError("Y must be nonnegative", module="aj")
        a = 2 * wmp.pi * n
        terms = _closed_form_terms(r, a, Yw, wmp)
        S = wmp.fsum(terms)
        sumabs = wmp.fsum(abs(t) for t in terms)
        aY = a * Yw
        rel = (4 * r + 12 + 4 * aY) * wmp.ldexp(1, 1 - wp)
        # cancellation bound relative to |S|
        if S > 0 and sumabs * rel < S * mp.ldexp(1, -ctx.bits - 4):
            break
        if S > 0:
            guard += int(wmp.log(sumabs / S, 2)) + 8
        else:
            guard *= 2
        if guard > 64 * ctx.bits + 4096:
            raise ValidationError("closed form did not stabilise", module="aj")
    ex = wmp.exp(-aY)
    value = ex * S
    err = up_mul(wmp, ex, sumabs, rel, 1 + wmp.ldexp(1, -20))
    center, drift = round_exact(mp, value._mpf_, libmp.fzero)
    radius = up_add(mp, err, drift)
    spread = up_add(mp, to_mpf(mp, Y_radius), Yerr)
    if spread:
        radius = up_add(mp, radius, _derivative_bound(r, n, Yw, spread, ctx))
    return BallComplex(center, radius)


def _derivative_bound(r, n, Y, delta, ctx):
    """``delta * sup |dE/dY|`` over ``[Y - delta, Y + delta]``.

    E is decreasing in Y and ``E(Y - delta) <= e^{2 pi n delta} E(Y)``.
    """
    mp = ctx.mp
    a = 2 * mp.pi * n
    if a * delta > mp.ldexp(1, -20):
        raise ValidationError("Y uncertainty too large for a derivative bound", module="aj")
    slack = 1 + mp.ldexp(1, -18)
    if r == 0:
        return up_mul(mp, delta, mp.exp(-a * (Y - delta)), slack)
    lower = kernel_integral(r - 1, n, Y, ctx)
    bound = up_add(mp, lower.center, lower.radius)
    return up_mul(mp, delta, 2 * r, Y + delta, bound, slack)


def kernel_integral_bound(r: int, n: int, Y, mp):
    """Cheap upper bound for ``E(r, n, Y)`` from the all-positive expansion."""
    a = 2 * mp.pi * n
    Y = to_mpf(mp, Y)
    s = mp.fsum(
        math.comb(r, i) * (2 * Y) ** (r - i) * math.factorial(r + i) / a ** (r + i + 1) for i in range(r + 1)
    )
    return up_mul(mp, s, mp.exp(-a * Y), 1 + mp.ldexp(1, 8 - mp.prec))


def _point_data(tau, mp):
    """Exact X and (Y, radius of Y) of a point given as FieldElement or complex number."""
    if isinstance(tau, FieldElement):
        X = tau.u
        v = tau.v
        Y = mp.sqrt(tau.d) * v.numerator / v.denominator
        return X, Y, abs(Y) * mp.ldexp(1, 3 - mp.prec)
    z = tau
    if isinstance(z, complex) or hasattr(z, "_mpc_"):
        X = exact_fraction(to_mpf(mp, z.real))
        return X, to_mpf(mp, z.imag), mp.mpf(0)
    X, Y = z
    Yv, Yerr = real_input(mp, Y)
    return exact_fraction(X), Yv, Yerr


def line_integral_series(coefficients, env, r: int, tau, ctx: PrecisionContext, y_min=DEFAULT_Y_MIN):
    """``-i (-1)^r sum_n a_n e^{2 pi i n X} E(r, n, Y)`` with a rigorous radius.

    ``coefficients`` are ``a_1, a_2, ...`` (ints or decimals) and ``env`` a pair
    ``(C, e)`` with ``|a_n| <= C n^e`` for all n.  ``tau`` is a FieldElement,
    a complex number or a pair ``(X, Y)``.
    """
    mp = ctx.mp
    X, Y, Yrad = _point_data(tau, ctx.with_bits(ctx.bits + 32).mp)
    if Y < y_min:
        raise ValidationError(f"Im tau' = {mp.nstr(Y, 6)} below y_min = {y_min}", module="aj")
    C, e = env
    E1 = kernel_integral_bound(r, 1, Y, mp) * (1 + mp.ldexp(1, -10))
    decay = mp.exp(-2 * mp.pi * Y)
    M, tail = series_terms(
        len(coefficients), env, decay, ctx.target_eps, lambda n: C * mp.mpf(n) ** e * E1 * decay ** (n - 1)
    )
    wctx = ctx.with_bits(ctx.bits + 24 + M.bit_length())
    wmp = wctx.mp
    total = wmp.mpc(0)
    rad = wmp.mpf(0)
    mag = wmp.mpf(0)
    tiny = wmp.ldexp(16, -wmp.prec)
    for n in range(1, M + 1):
        a_n = coefficients[n - 1]
        if not isinstance(a_n, int):
            a_n = to_mpf(wmp, a_n)
        if a_n == 0:
            continue
        E = kernel_integral(r, n, Y, wctx, Y_radius=Yrad)
        frac = (n * X) % 1
        phase = wmp.expjpi(2 * wmp.mpf(frac.numerator) / frac.denominator)
        term = a_n * E.center * phase
        total += term
        size = abs(a_n) * abs(E.center)
        mag += size
        rad = up_add(wmp, rad, up_mul(wmp, abs(a_n), E.radius), up_mul(wmp, size, tiny))
    rad = up_add(wmp, rad, up_mul(wmp, mag, M + 4, wmp.ldexp(1, 1 - wmp.prec)), tail)
    if r % 2:
        total = wmp.mpc(-total.imag, total.real)  # i * total
    else:
        total = wmp.mpc(total.imag, -total.real)  # -i * total
    center, drift = round_exact(mp, *total._mpc_)
    return BallComplex(center, up_add(mp, rad, drift))


def heegner_line_integral(f: Newform, P: CMPoint, ctx: PrecisionContext | None = None,
                          y_min=DEFAULT_Y_MIN) -> BallComplex:
    """The oriented integral of ``(z - tau')^r (z - conj tau')^r f(z) dz`` from ``i oo`` to ``tau'``.

    Taken along the vertical line ``Re z = Re tau'``, where the integrand
    unfolds termwise into kernel integrals ``E(r, n, Im tau')``.
    """
    ctx = ctx or PrecisionContext()
    value = P.value if isinstance(P, CMPoint) else P
    return line_integral_series(f.coefficients, envelope(f), f.r, value, ctx, y_min)


def m_kk(N: int, k: int, k2: int) -> int:
    """``(2N)^k k! 2^{k2} k2!``"""
    return (2 * N) ** k * math.factorial(k) * 2**k2 * math.factorial(k2)


@dataclass(frozen=True)
class ExactScalar:
    """``coefficient * pi**pi_power * i**i_power`` with a rational coefficient."""

    coefficient: Fraction
    pi_power: int
    i_power: int

    def ball(self, ctx: PrecisionContext) -> BallComplex:
        mp = ctx.with_bits(ctx.bits + 16).mp
        mag = mp.mpf(self.coefficient.numerator) / self.coefficient.denominator * mp.pi**self.pi_power
        unit = [(1, 0), (0, 1), (-1, 0), (0, -1)][self.i_power % 4]
        z = mp.mpc(unit[0] * mag, unit[1] * mag)
        center, drift = round_exact(ctx.mp, *z._mpc_)
        rel = (self.pi_power + 4) * mp.ldexp(1, 1 - mp.prec)
        return BallComplex(center, up_add(ctx.mp, drift, up_mul(ctx.mp, abs(mag), rel)))

    def __complex__(self):
        return complex(self.ball(PrecisionContext(64)).center)

    def __str__(self):
        return f"{self.coefficient} * pi^{self.pi_power} * i^{self.i_power % 4}"


def aj_constant(field, N: int, d_phi: int, r: int, v) -> ExactScalar:
    """Prefactor of the line integral in the Abel-Jacobi formula.

    With ``tau' = u + v sqrt(-d_K)`` one has ``tau' - conj tau' = 2 v sqrt(-d_K)``
    and the square roots cancel, leaving
    ``(-1)^r 2^{r+1} d_phi^k m_{k,k}^2 pi^{r+1} i^{r+1} / v^r``.
    """
    k = 2 * r
    v = Fraction(v)
    if v <= 0:
        raise ValidationError("Im tau' must be positive", module="aj")
    coef = Fraction((-1) ** r * 2 ** (r + 1) * d_phi**k * m_kk(N, k, k) ** 2) / v**r
    return ExactScalar(coef, r + 1, r + 1)


@dataclass(frozen=True)
class AJResult:
    integral: BallComplex
    constant: ExactScalar
    representative: BallComplex
    label: str
    point: CMPoint
    r: int
    N: int
    m: int


def aj_representative(f: Newform, P: CMPoint, ctx: PrecisionContext | None = None) -> AJResult:
    """Constant times line integral: one representative of the Abel-Jacobi image.

    Requires ``P`` to come with a level structure normalised so that the
    isogeny sends ``t`` to ``1/N``.
    """
    ctx = ctx or PrecisionContext()
    r = f.r
    if r < 1:
        raise ValidationError("weight must be at least 4", module="aj")
    if P.level is None:
        raise ValidationError("CM point carries no level structure", module="aj")
    if P.level.N != f.level:
        raise ValidationError(f"level structure has N={P.level.N}, newform level {f.level}", module="aj")
    if not P.normalized():
        raise ValidationError(
            f"phi(t) = {P.multiplier % P.level.N}/N, not 1/N: need the isogeny degree factors = 1 mod N",
            module="aj",
        )
    if P.degree != (P.p or 1) * P.q:
        raise ValidationError("degree does not match the isogeny primes", module="aj")
    const = aj_constant(None, f.level, P.degree, r, P.value.v)
    integral = heegner_line_integral(f, P, ctx)
    rep = ball_mul(const.ball(ctx), integral, ctx)
    return AJResult(integral, const, rep, f.label, P, r, f.level, m_kk(f.level, 2 * r, 2 * r))
