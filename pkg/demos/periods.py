"""
Period functionals by Fricke splitting
======================================

For a newform with Fricke sign eps, the integral of P(z) f(z) over
[0, i oo] folds onto [i/sqrt(N), i oo], where each q-expansion term
integrates exactly.
"""

from pathlib import Path

from heegner_aj import PrecisionContext, j_functional, parse_newform
from heegner_aj.periods import fricke_transform

f = parse_newform(Path(__file__).resolve().parents[1] / "tests" / "data" / "5.4.a.a.json")
ctx = PrecisionContext(128)
mp = ctx.mp
scale = (2j * mp.pi) ** (f.k + 1)

# %%
# Monomials z^m: the normalised value is imaginary for even m, real for odd m

for m in range(f.k + 1):
    J = j_functional(f, [0] * m + [1], ctx)
    print(f"z^{m}:  {mp.nstr(J.value.center / scale, 20)}")

# %%
# The transformed polynomial gives the same value

P = [1, 2, 3]
Pt = fricke_transform(P, f.level, f.k, f.fricke)
print(P, "->", [str(c) for c in Pt])
print(mp.nstr(j_functional(f, P, ctx).value.center, 15))
print(mp.nstr(j_functional(f, Pt, ctx).value.center, 15))
