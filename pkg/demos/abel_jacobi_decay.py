"""
Abel-Jacobi values along the pq-family
======================================

As p grows with q fixed, the Abel-Jacobi representative of the Heegner
cycle approaches its leading term J, and the relative gap sits under the
bound c * exp(-2 pi Y).
"""

from pathlib import Path

from heegner_aj import ImagQuadField, PrecisionContext, cusp_constant, level_structure_from_t, parse_newform
from heegner_aj.asym import point_XY, ratio_J, sweep_row
from heegner_aj.primes import sweep_primes, valid_qs

f = parse_newform(Path(__file__).resolve().parents[1] / "tests" / "data" / "5.4.a.a.json")
K = ImagQuadField(11)
ls = level_structure_from_t(1, 1, 5)
ctx = PrecisionContext(128)
mp = ctx.mp

q = valid_qs(K, ls, 5, 3, 1000)[0]
ps = sweep_primes(K, ls, 5, q, 10, 200, 8)
_, y0 = point_XY(K, ls, ps[0], q, 0, mp)
c = cusp_constant(f, y0)
print(f"q = {q}, c = {mp.nstr(c, 8)}")

# %%
# Measured relative error against the bound

for p in ps:
    row = sweep_row(f, K, ls, p, q, 0, c, ctx)
    print(f"p={p:>5} gamma={float(row.datum.gamma):7.2f}  rel_err={mp.nstr(row.rel_err, 5):>12}"
          f"  bound={mp.nstr(row.bound, 5):>12}  ok={row.within_bound}")

# %%
# beta = oo is exponentially smaller than finite beta

for p in ps[:4]:
    print(p, mp.nstr(ratio_J(K, ls, 1, p, q, 0), 6))
