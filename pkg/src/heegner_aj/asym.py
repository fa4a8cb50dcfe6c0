"""Asymptotic data of the pq-family: the improper integrals I, the leading
terms J, the polynomial P with I = e^{-gamma pi sqrt(d_K)/|c tau + d|^2} P(gamma),
and the relative error bound between the Abel-Jacobi value and J.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from mpmath import libmp

from .aj import kernel_integral, m_kk
from .errors import DomainError, ValidationError
from .isogeny import INF, LevelStructure, _normalize_beta
from .numerics import BallComplex, PrecisionContext, round_exact, to_mpf, up_add, up_mul
from .primes import index_pair_violations
from .quadfield import ImagQuadField


def gamma_kappa(p: int, q: int, beta):
    """``(pq, 1)`` for beta = oo, else ``(p/q, q)``."""
    beta = _normalize_beta(beta, q)
    if beta == INF:
        return Fraction(p * q), 1
    return Fraction(p, q), q


def _gamma_tau_parts(field: ImagQuadField, ls: LevelStructure):
    """``Re gamma(tau)`` and ``|c tau + d|^2`` from the expanded quotient.

    ``gamma(tau) = (a tau + b)(c conj(tau) + d) / |c tau + d|^2`` with
    ``|tau|^2 = d_K (d_K + 1)/4``, ``Re tau = -d_K/2`` and ``Im`` part
    ``sqrt(d_K) / (2 |c tau + d|^2)`` since the determinant is 1.
    """
    dK = field.d_K
    a, b, c, d = ls.a, ls.b, ls.c, ls.d
    abs2 = Fraction(dK * (dK + 1), 4)
    re_tau = Fraction(-dK, 2)
    norm = c * c * abs2 + 2 * c * d * re_tau + d * d
    re = (a * c * abs2 + (a * d + b * c) * re_tau + b * d) / norm
    if norm.denominator != 1:
        raise ArithmeticError("|c tau + d|^2 is not an integer")
    return re, int(norm)


@dataclass(frozen=True)
class AsymptoticDatum:
    """``J = |J| * i^r * e^{2 pi i X}``; magnitude and phase are kept apart."""

    p: int
    q: int
    beta: object
    r: int
    gamma: Fraction
    kappa: int
    X: Fraction
    Y: object
    norm_ctd: int
    I: BallComplex
    J_abs: BallComplex
    bits: int = 128

    @property
    def i_power(self) -> int:
        return self.r % 4

    def phase(self, mp):
        unit = [1, 1j, -1, -1j][self.i_power]
        frac = self.X % 1
        return unit * mp.expjpi(2 * mp.mpf(frac.numerator) / frac.denominator)

    @property
    def J(self):
        return self.J_ball().center

    def J_ball(self, ctx: PrecisionContext | None = None) -> BallComplex:
        ctx = ctx or PrecisionContext(self.bits)
        mp = ctx.with_bits(ctx.bits + 16).mp
        ph = self.phase(mp)
        mag = to_mpf(mp, self.J_abs.center.real)
        z = ph * mag
        center, drift = round_exact(ctx.mp, *mp.mpc(z)._mpc_)
        rel = mp.ldexp(16, -mp.prec)
        radius = up_add(ctx.mp, drift, self.J_abs.radius, up_mul(ctx.mp, mag, rel))
        return BallComplex(center, radius)


def _validate(field, ls, r, p, q):
    if r < 0:
        raise ValidationError("r must be nonnegative", module="asym")
    bad = index_pair_violations(field, ls, ls.N, p, q)
    if bad:
        raise ValidationError(f"(p, q) = ({p}, {q}) not an index pair: {'; '.join(bad)}", module="asym")


def point_XY(field: ImagQuadField, ls: LevelStructure, p: int, q: int, beta, mp):
    """``(X, Y)`` of the pq-point; X exact, Y at the precision of ``mp``."""
    re, norm = _gamma_tau_parts(field, ls)
    beta = _normalize_beta(beta, q)
    if beta == INF:
        X = p * q * re
    else:
        X = p * (re + beta) / q
    gamma, _ = gamma_kappa(p, q, beta)
    Y = mp.mpf(gamma.numerator) / gamma.denominator * mp.sqrt(field.d_K) / (2 * norm)
    return X, Y


def datum(field: ImagQuadField, ls: LevelStructure, r: int, p: int, q: int, beta,
          ctx: PrecisionContext | None = None, validate: bool = True) -> AsymptoticDatum:
    """Assemble ``(gamma, kappa, X, Y, I, J)`` for one pq-point.

    ``I`` is the kernel integral ``E(r, 1, Y)`` and
    ``|J| = 2^{k+1} pi^{r+1} |c tau + d|^k (pq)^r kappa^k m_{k,k}^2 I``.
    """
    ctx = ctx or PrecisionContext()
    if validate:
        _validate(field, ls, r, p, q)
    beta = _normalize_beta(beta, q)
    gamma, kappa = gamma_kappa(p, q, beta)
    wctx = ctx.with_bits(ctx.bits + 32)
    X, Y = point_XY(field, ls, p, q, beta, wctx.mp)
    _, norm = _gamma_tau_parts(field, ls)
    I = kernel_integral(r, 1, Y, ctx, Y_radius=Y * wctx.ulp(4))
    k = 2 * r
    mp = ctx.mp
    m = m_kk(ls.N, k, k)
    factor_int = 2 ** (k + 1) * norm**r * (p * q) ** r * kappa**k * m * m
    wmp = wctx.mp
    factor = wmp.mpf(factor_int) * wmp.pi ** (r + 1)
    mag = factor * to_mpf(wmp, I.center.real)
    center, drift = round_exact(mp, mag._mpf_, libmp.fzero)
    radius = up_add(mp, drift, up_mul(mp, factor, I.radius, 1 + mp.ldexp(1, -20)),
                    up_mul(mp, mag, (r + 8) * wmp.ldexp(1, 1 - wmp.prec)))
    return AsymptoticDatum(p, q, beta, r, gamma, kappa, X, to_mpf(mp, Y), norm, I, BallComplex(center, radius), ctx.bits)


def I_closed(field: ImagQuadField, ls: LevelStructure, r: int, p: int, q: int, beta,
             ctx: PrecisionContext | None = None, validate: bool = True) -> BallComplex:
    """The improper integral from its closed form in ``gamma`` and ``h = sqrt(d_K)/(2|c tau + d|^2)``.

    ``gamma^{k+1} e^{-gamma pi sqrt(d_K)/|c tau + d|^2}
    sum_j sum_s (-1)^{r-j} C(r,j) (2j)!/(2j-s)! h^{k-s} (2 pi gamma)^{-(s+1)}``
    """
    ctx = ctx or PrecisionContext()
    if validate:
        _validate(field, ls, r, p, q)
    gamma, _ = gamma_kappa(p, q, beta)
    _, norm = _gamma_tau_parts(field, ls)
    k = 2 * r
    extra = 24 + 2 * r
    while True:
        wmp = ctx.with_bits(ctx.bits + extra).mp
        g = wmp.mpf(gamma.numerator) / gamma.denominator
        h = wmp.sqrt(field.d_K) / (2 * norm)
        two_pi_g = 2 * wmp.pi * g
        terms = []
        for j in range(r + 1):
            for s in range(2 * j + 1):
                c = (-1) ** (r - j) * math.comb(r, j) * math.perm(2 * j, s)
                terms.append(c * h ** (k - s) / two_pi_g ** (s + 1))
        total = wmp.fsum(terms)
        size = wmp.fsum(abs(t) for t in terms)
        expo = g * wmp.pi * wmp.sqrt(field.d_K) / norm
        rel = (2 * k + 16 + 4 * expo) * wmp.ldexp(1, 1 - wmp.prec)
        if total > 0 and size * rel < total * ctx.ulp(-6):
            break
        if total > 0:
            extra += int(wmp.log(size / total, 2)) + 8
        else:
            extra *= 2
    lead = g ** (k + 1) * wmp.exp(-expo)
    value = lead * total
    center, drift = round_exact(ctx.mp, value._mpf_, libmp.fzero)
    err = up_mul(ctx.mp, lead, size, rel, 1 + wmp.ldexp(1, -16))
    return BallComplex(center, up_add(ctx.mp, drift, err))


@dataclass(frozen=True)
class PPolynomial:
    """``P(X) = sum_m coeffs[m] X^m``; ``weights[m]`` is the exact integer part of ``coeffs[m]``.

    ``coeffs[m] = weights[m] * h^m / (2 pi)^{k-m+1}``.
    """

    r: int
    h: object
    weights: tuple
    coeffs: tuple

    def __call__(self, x, mp=None):
        mp = mp or self.h.context
        x = to_mpf(mp, x)
        acc = mp.mpf(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    @property
    def degree(self) -> int:
        nz = [m for m, w in enumerate(self.weights) if w]
        return max(nz) if nz else -1


def P_polynomial(field: ImagQuadField, ls: LevelStructure, r: int, ctx: PrecisionContext | None = None) -> PPolynomial:
    """Coefficients of P, collected exactly by powers of X before rounding."""
    ctx = ctx or PrecisionContext()
    mp = ctx.mp
    _, norm = _gamma_tau_parts(field, ls)
    k = 2 * r
    weights = [0] * (k + 1)
    for j in range(r + 1):
        for s in range(2 * j + 1):
            weights[k - s] += (-1) ** (r - j) * math.comb(r, j) * math.perm(2 * j, s)
    h = mp.sqrt(field.d_K) / (2 * norm)
    coeffs = tuple(w * h**m / (2 * mp.pi) ** (k - m + 1) for m, w in enumerate(weights))
    return PPolynomial(r, h, tuple(weights), coeffs)


def decay_exponent(field: ImagQuadField, ls: LevelStructure, gamma, mp):
    """``gamma pi sqrt(d_K) / |c tau + d|^2``, which equals ``2 pi Y``."""
    _, norm = _gamma_tau_parts(field, ls)
    return to_mpf(mp, Fraction(gamma)) * mp.pi * mp.sqrt(field.d_K) / norm


def ratio_J(field: ImagQuadField, ls: LevelStructure, r: int, p: int, q: int, beta,
            ctx: PrecisionContext | None = None):
    """``|J_oo / J_beta| = q^{-k} P(pq)/P(p/q) e^{-pi sqrt(d_K)(q^2-1)p/(q |c tau + d|^2)}``."""
    ctx = ctx or PrecisionContext()
    beta = _normalize_beta(beta, q)
    if beta == INF:
        raise ValidationError("ratio_J needs a finite beta", module="asym")
    mp = ctx.with_bits(ctx.bits + 16).mp
    P = P_polynomial(field, ls, r, PrecisionContext(mp.prec))
    top, bottom = P(p * q, mp), P(Fraction(p, q), mp)
    if not bottom > 0:
        raise DomainError(f"P(p/q) = {mp.nstr(bottom, 5)} is not positive")
    if not top > 0:
        raise DomainError(f"P(pq) = {mp.nstr(top, 5)} is not positive")
    _, norm = _gamma_tau_parts(field, ls)
    expo = mp.pi * mp.sqrt(field.d_K) * (q * q - 1) * p / (q * norm)
    return to_mpf(ctx.mp, mp.mpf(q) ** (-2 * r) * top / bottom * mp.exp(-expo))


def ratio_J_direct(field, ls, r, p, q, beta, ctx: PrecisionContext | None = None):
    """``|J_oo| / |J_beta|`` from two assembled data."""
    ctx = ctx or PrecisionContext()
    inf = datum(field, ls, r, p, q, INF, ctx)
    fin = datum(field, ls, r, p, q, beta, ctx)
    return inf.J_abs.center.real / fin.J_abs.center.real


def lem_est_bound(field: ImagQuadField, ls: LevelStructure, r: int, p: int, q: int, beta, c_majorant,
                  ctx: PrecisionContext | None = None):
    """``c * e^{-gamma pi sqrt(d_K)/|c tau + d|^2}``, rounded up.

    With ``c`` the constant of :func:`heegner_aj.modforms.cusp_constant` at a
    height ``y0 <= Y`` this bounds the relative distance between the
    Abel-Jacobi representative and J.
    """
    ctx = ctx or PrecisionContext(64)
    mp = ctx.mp
    gamma, _ = gamma_kappa(p, q, beta)
    expo = decay_exponent(field, ls, gamma, mp)
    return up_mul(mp, to_mpf(mp, c_majorant), mp.exp(-expo), 1 + mp.ldexp(1, 4 - mp.prec))


@dataclass(frozen=True)
class SweepRow:
    datum: AsymptoticDatum
    aj_abs: object
    rel_err: object
    bound: object
    slack: object
    bits: int

    @property
    def within_bound(self) -> bool:
        """``|AJ - J| <= bound |J| + combined radii``, all relative to ``|J|``."""
        return self.rel_err <= self.bound + self.slack


def row_context(base: PrecisionContext, r: int, Y, extra_bits: int = 64) -> PrecisionContext:
    """Context resolving ``|AJ - J|/|J| ~ e^{-2 pi Y}`` with ``extra_bits`` to spare.

    The absolute target is set relative to the size of the line integral.
    """
    mp = base.mp
    Y = to_mpf(mp, Y)
    rel_bits = max(base.bits - 8, int(mp.ceil(2 * mp.pi * Y / mp.log(2))) + extra_bits)
    scale = kernel_integral(r, 1, Y, base).center.real
    return base.relative(scale, rel_bits)


def sweep_row(f, field: ImagQuadField, ls: LevelStructure, p: int, q: int, beta, c_majorant,
              ctx: PrecisionContext | None = None) -> SweepRow:
    """Compare the Abel-Jacobi representative with its leading term J at one pq-point."""
    from .aj import aj_representative
    from .isogeny import tau_pq_t

    ctx = ctx or PrecisionContext()
    if f.level != ls.N:
        raise ValidationError(f"newform level {f.level} differs from N = {ls.N}", module="asym")
    r = f.r
    _, Y = point_XY(field, ls, p, q, beta, ctx.mp)
    rctx = row_context(ctx, r, Y)
    d = datum(field, ls, r, p, q, beta, rctx)
    point = tau_pq_t(field, ls, p, q, beta)
    rep = aj_representative(f, point, rctx).representative
    J = d.J_ball(rctx)
    mp = rctx.mp
    Jabs = abs(J.center)
    rel = abs(rep.center - J.center) / Jabs
    slack = (rep.radius + J.radius) / (Jabs - J.radius)
    bound = lem_est_bound(field, ls, r, p, q, beta, c_majorant, PrecisionContext(64))
    return SweepRow(d, abs(rep.center), rel, to_mpf(mp, bound), slack, rctx.bits)
