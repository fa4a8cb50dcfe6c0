"""
Kernel integrals and their closed form
======================================

The building block of every line integral here is

    E(r, n, Y) = int_Y^oo (y^2 - Y^2)^r exp(-2 pi n y) dy.

Integrating by parts gives a finite double sum.  We compare it with
adaptive quadrature and watch the radius stay honest as Y grows.
"""

import math

from heegner_aj import PrecisionContext, kernel_integral
from heegner_aj.numerics import power_exp_tail, quad_adaptive

ctx = PrecisionContext(128)
mp = ctx.mp

# %%
# Closed form against quadrature
# ------------------------------
# The quadrature is asked for an absolute error relative to the size of E.

for r in range(4):
    for Y in ("0.3", "1", "3.5"):
        E = kernel_integral(r, 1, Y, ctx)
        y0 = mp.mpf(Y)
        qctx = ctx.relative(E.center.real, 110)
        Q = quad_adaptive(
            lambda y: (y * y - y0 * y0) ** r * qctx.mp.exp(-2 * qctx.mp.pi * y),
            y0, math.inf, lambda T: power_exp_tail(2 * r, 2 * qctx.mp.pi, T, qctx), qctx,
        )
        rel = abs(Q.center - E.center) / E.center.real
        print(f"r={r} Y={Y:>4}  E={mp.nstr(E.center.real, 20):>26}  rel.dev={mp.nstr(rel, 3)}")

# %%
# Cancellation at large Y
# -----------------------
# The signed double sum cancels to many digits once 2 pi n Y is large.
# Guard bits are added until the result is good to the working precision.

for Y in (10, 50, 200):
    E = kernel_integral(3, 1, Y, ctx)
    print(f"Y={Y:>3}  E={mp.nstr(E.center.real, 15)}  relative radius={mp.nstr(E.radius / E.center.real, 3)}")
