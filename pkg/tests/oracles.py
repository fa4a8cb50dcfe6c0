"""Independent reference computations shared by the tests.

Nothing here calls the closed forms under test: integrals are done by
quadrature of the defining integrands, and the kernel oracle uses the
all-positive expansion in powers of 2Y instead of the signed double sum.
"""

import math
from functools import lru_cache

from heegner_aj.modforms import eval as f_eval
from heegner_aj.numerics import BallComplex, PrecisionContext, power_exp_tail, quad_adaptive


def kernel_positive(r, n, Y, mp):
    """``int_Y^oo (y^2-Y^2)^r e^{-2 pi n y} dy`` via ``y = Y + t``: all terms positive."""
    a = 2 * mp.pi * n
    Y = mp.mpf(Y)
    s = mp.fsum(math.comb(r, i) * (2 * Y) ** (r - i) * mp.factorial(r + i) / a ** (r + i + 1) for i in range(r + 1))
    return mp.exp(-a * Y) * s


def kernel_quad(r, n, Y, ctx):
    """Quadrature of the kernel's defining integrand."""
    mp = ctx.mp
    Y = mp.mpf(Y)
    a = 2 * mp.pi * n

    def g(y):
        return (y * y - Y * Y) ** r * mp.exp(-a * y)

    return quad_adaptive(g, Y, math.inf, lambda T: power_exp_tail(2 * r, a, T, ctx), ctx)


def line_integral_quad(f, point, ctx, f_bits=160):
    """``int_{tau}^{i oo} (z - tau)^r (z - conj tau)^r f(z) dz`` by quadrature up the line Re z = Re tau.

    ``point`` is the exact FieldElement tau; X and Y are formed at the working
    precision.  f is evaluated at higher precision, relative to its size
    near the lower limit, so its ball radius stays negligible.
    """
    mp = ctx.mp
    X = mp.mpf(point.u.numerator) / point.u.denominator
    Y = mp.sqrt(point.d) * point.v.numerator / point.v.denominator
    fctx = PrecisionContext(f_bits).relative(mp.exp(-2 * mp.pi * Y), f_bits - 8)
    r = f.r

    def g(y):
        z = mp.mpc(X, y)
        v = f_eval(f, z, fctx, y_min=0.001)
        # (z - tau)(z - conj tau) = (y - Y)(y + Y) * (-1) ... computed literally
        w = ((z - mp.mpc(X, Y)) * (z - mp.mpc(X, -Y))) ** r * 1j
        return BallComplex(w * v.center, abs(w) * v.radius * 1.001)

    # |f(z)| <= 4 e^{-2 pi y} on y >= 1 for the weight-4 fixture; |w| <= y^{2r}
    return quad_adaptive(g, Y, math.inf, lambda T: 8 * power_exp_tail(2 * r, 2 * mp.pi, T, ctx), ctx)


def period_quad(f, P, ctx, h=None):
    """``int_0^{i oo} P(z) f(z) dz`` split at ``i h``; the lower leg uses f(-1/(Nz)) = eps N^{w/2} z^w f(z)."""
    mp = ctx.mp
    fctx = PrecisionContext(160)
    N, eps, w = f.level, f.fricke, f.weight
    h = mp.mpf(3) / 10 if h is None else mp.mpf(h)

    def Pz(z):
        return sum(c * z**j for j, c in enumerate(P))

    def upper(y):
        z = mp.mpc(0, y)
        v = f_eval(f, z, fctx, y_min=0.01)
        wt = Pz(z) * 1j
        return BallComplex(wt * v.center, abs(wt) * v.radius * 1.01)

    def lower(y):
        if y == 0:
            return mp.mpc(0)
        z = mp.mpc(0, y)
        u = -1 / (N * z)
        v = f_eval(f, u, fctx)
        scale = eps * mp.mpf(N) ** (w // 2) * u**w
        wt = Pz(z) * 1j
        return BallComplex(wt * scale * v.center, abs(wt * scale) * v.radius * 1.01)

    C = sum(abs(c) for c in P)
    deg = len(P) - 1
    top = quad_adaptive(upper, h, math.inf, lambda T: 8 * C * power_exp_tail(deg, 2 * mp.pi, T, ctx), ctx)
    bottom = quad_adaptive(lower, 0, h, 0, ctx)
    return BallComplex(top.center + bottom.center, top.radius + bottom.radius)


def in_lattice(y, x):
    """Whether ``y`` lies in ``Z + Z x`` (x irrational)."""
    t = y.v / x.v
    s = y.u - t * x.u
    return t.denominator == 1 and s.denominator == 1


def conductor_by_multipliers(field, x):
    """Least f >= 1 with ``f * omega`` stabilising ``Z + Z x``: the conductor of its multiplier ring."""
    omega = field.tau
    f = 1
    while True:
        a = f * omega
        if in_lattice(a, x) and in_lattice(a * x, x):
            return f
        f += 1


@lru_cache(maxsize=None)
def inert_by_roots(q, d_K):
    """q (odd, prime to d_K) is inert iff the minimal polynomial of the ring generator has no root mod q."""
    if d_K % 4 == 3:
        poly = lambda x: x * x + x + (1 + d_K) // 4  # noqa: E731
    else:
        poly = lambda x: x * x + d_K // 4  # noqa: E731
    return all(poly(x) % q for x in range(q))


def recheck_pair(p, q, d_K, N, avoid):
    """Independent membership test for the index set."""
    from sympy import isprime

    return (
        isprime(p) and isprime(q) and p % 2 == 1 and q % 2 == 1 and p > q
        and p % N == 1 and q % N == 1
        and math.gcd(p * q, avoid) == 1
        and inert_by_roots(q, d_K)
    )
