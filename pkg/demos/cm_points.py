"""
CM points from q-isogenies
==========================

For K = Q(sqrt(-11)) and N = 5, we list the q+1 lattices <1, tau_{q,beta}>,
their conductors, and how the level structure t = (tau + 1)/5 moves under
each isogeny.
"""

from heegner_aj import INF, ImagQuadField, enumerate_isogeny_classes, level_structure_from_t, tau_pq_t
from heegner_aj.isogeny import kernel_match

K = ImagQuadField(11)
ls = level_structure_from_t(1, 1, 5)
print("gamma =", ls.gamma, " |c tau + d|^2 =", ls.norm_ctd(K))

# %%
# An inert prime: all q+1 points have conductor q

census = enumerate_isogeny_classes(K, 7)
print(census.splitting, [c for _, c in census.rows])
print("beta -> beta':", {b: kernel_match(ls, 7, b) for b, _ in census.rows})

# %%
# A split prime: exactly two points keep the maximal order

census = enumerate_isogeny_classes(K, 3)
print(census.splitting, [c for _, c in census.rows])

# %%
# Composite pq-isogenies land in the order of conductor pq

for beta in (INF, 0, 17):
    P = tau_pq_t(K, ls, 61, 41, beta)
    print(f"beta={beta!s:>3}  tau' = {P.value.u} + {P.value.v} sqrt(-11)  conductor={P.conductor}"
          f"  normalized={P.normalized()}")
