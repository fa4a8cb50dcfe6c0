"""Prime pairs for the explicit pq-isogeny family, and primes q in the congruence
classes used for the rank argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np

from .errors import ValidationError
from .isogeny import LevelStructure
from .quadfield import ImagQuadField, heegner_hypothesis, kronecker

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
SEGMENT = 1 << 16


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin; exact for n < 3.3e24."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def small_primes(limit: int) -> np.ndarray:
    """Primes ``<= limit`` by the sieve of Eratosthenes."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.flatnonzero(flags).astype(np.int64)


def primes_in_range(lo: int, hi: int) -> Iterator[int]:
    """Primes in ``[lo, hi]`` in increasing order, sieved segment by segment."""
    lo = max(lo, 2)
    if hi < lo:
        return
    base = small_primes(math.isqrt(hi))
    for start in range(lo, hi + 1, SEGMENT):
        stop = min(start + SEGMENT, hi + 1)
        flags = np.ones(stop - start, dtype=bool)
        for p in base:
            p = int(p)
            first = max(p * p, -(-start // p) * p)
            if first >= stop:
                continue
            flags[first - start :: p] = False
        for idx in np.flatnonzero(flags):
            yield start + int(idx)


@dataclass(frozen=True)
class IndexPair:
    p: int
    q: int

    @property
    def key(self):
        return (self.q, self.p)


def _coprime_set(field: ImagQuadField, ls: LevelStructure) -> int:
    return abs(ls.c) * field.d_K * ls.norm_ctd(field)


def q_violations(field: ImagQuadField, ls: LevelStructure, N: int, q: int) -> list:
    """Reasons why ``q`` cannot be the inert prime of an index pair (empty if valid)."""
    bad = []
    if q % 2 == 0 or not is_prime(q):
        bad.append("q not an odd prime")
        return bad
    if math.gcd(q, _coprime_set(field, ls)) != 1:
        bad.append("q divides c*d_K*|c tau + d|^2")
    elif kronecker(-field.d_K, q) != -1:
        bad.append("q not inert")
    if q % N != 1:
        bad.append("q != 1 mod N")
    return bad


def p_violations(field: ImagQuadField, ls: LevelStructure, N: int, p: int) -> list:
    bad = []
    if p % 2 == 0 or not is_prime(p):
        bad.append("p not an odd prime")
        return bad
    if math.gcd(p, _coprime_set(field, ls)) != 1:
        bad.append("p divides c*d_K*|c tau + d|^2")
    if p % N != 1:
        bad.append("p != 1 mod N")
    return bad


def index_pair_violations(field: ImagQuadField, ls: LevelStructure, N: int, p: int, q: int) -> list:
    """All failed membership conditions for ``(p, q)``; empty means the pair is valid."""
    bad = q_violations(field, ls, N, q) + p_violations(field, ls, N, p)
    if p <= q:
        bad.append("p <= q")
    return bad


def _check_setup(field: ImagQuadField, ls: LevelStructure, N: int):
    if ls.N != N:
        raise ValidationError(f"level structure is for N={ls.N}, not {N}", module="primes")
    if not heegner_hypothesis(field.d_K, N):
        raise ValidationError(f"Heegner hypothesis fails for d_K={field.d_K}, N={N}", module="primes")


def valid_qs(field: ImagQuadField, ls: LevelStructure, N: int, lo: int, hi: int) -> list:
    _check_setup(field, ls, N)
    return [q for q in primes_in_range(max(lo, 3), hi) if not q_violations(field, ls, N, q)]


def valid_ps(field: ImagQuadField, ls: LevelStructure, N: int, lo: int, hi: int) -> list:
    _check_setup(field, ls, N)
    return [p for p in primes_in_range(max(lo, 3), hi) if not p_violations(field, ls, N, p)]


def index_stream(field: ImagQuadField, ls: LevelStructure, N: int, limit: int) -> Iterator[IndexPair]:
    """All index pairs with ``q < p <= limit``, ordered by ``(q, p)``."""
    _check_setup(field, ls, N)
    ps = valid_ps(field, ls, N, 3, limit)
    for q in valid_qs(field, ls, N, 3, limit):
        for p in ps:
            if p > q:
                yield IndexPair(p, q)


def _crt(r1: int, m1: int, r2: int, m2: int):
    g = math.gcd(m1, m2)
    if g != 1:
        raise ValidationError(f"moduli {m1} and {m2} are not coprime", module="primes")
    return (r1 + m1 * ((r2 - r1) * pow(m1, -1, m2) % m2)) % (m1 * m2), m1 * m2


def inert_classes(field: ImagQuadField) -> list:
    """Residues ``x`` mod d_K with ``(-d_K | x) = -1``: odd primes in them are inert."""
    return [x for x in range(field.d_K) if kronecker(-field.d_K, x) == -1]


def theorem_residues(field: ImagQuadField, N: int, ell: int):
    """Residues mod ``N * d_K * ell`` of ``q = 1 mod N``, ``q = -1 mod ell``, q inert."""
    for a, b, what in ((N, field.d_K, "N, d_K"), (N, ell, "N, ell"), (field.d_K, ell, "d_K, ell")):
        if math.gcd(a, b) != 1:
            raise ValidationError(f"gcd({what}) != 1", module="primes")
    base, mod = _crt(1 % N, N, ell - 1, ell)
    out = []
    for x in inert_classes(field):
        out.append(_crt(base, mod, x, field.d_K)[0])
    return sorted(out), mod * field.d_K


def theorem_q_search(field: ImagQuadField, N: int, ell: int, count: int, ls: LevelStructure | None = None,
                     require_rank_bound: bool = False) -> list:
    """The first ``count`` primes q with q = 1 mod N, q = -1 mod ell, q inert in K.

    With ``ls`` given, q must also avoid the primes of ``c * d_K * |c tau + d|^2``.
    ``require_rank_bound`` additionally enforces ``ell > 6 N d_K``.
    """
    if not is_prime(ell):
        raise ValidationError(f"ell = {ell} is not prime", module="primes")
    if require_rank_bound and ell <= 6 * N * field.d_K:
        raise ValidationError(f"ell = {ell} must exceed 6*N*d_K = {6 * N * field.d_K}", module="primes")
    if count < 0:
        raise ValidationError("count must be nonnegative", module="primes")
    residues, mod = theorem_residues(field, N, ell)
    avoid = _coprime_set(field, ls) if ls is not None else field.d_K
    found = []
    block = 0
    while len(found) < count:
        for res in residues:
            q = block * mod + res
            if q < 3 or not is_prime(q) or math.gcd(q, avoid) != 1:
                continue
            found.append(q)
            if len(found) == count:
                break
        block += 1
    return found


def sweep_primes(field: ImagQuadField, ls: LevelStructure, N: int, q: int, gamma_min, gamma_max, count: int,
                 finite_beta: bool = True) -> list:
    """Up to ``count`` valid p with ``gamma`` spread geometrically over ``[gamma_min, gamma_max]``.

    ``gamma = p/q`` for finite beta and ``pq`` for beta = oo.  For each target
    the least valid ``p >= target`` is taken; duplicates are dropped.
    """
    if q_violations(field, ls, N, q):
        raise ValidationError(f"q = {q} is not valid: {'; '.join(q_violations(field, ls, N, q))}", module="primes")
    if not 0 < gamma_min <= gamma_max or count < 1:
        raise ValidationError("need 0 < gamma_min <= gamma_max and count >= 1", module="primes")
    unit = q if finite_beta else Fraction(1, q)
    lo = max(q + 1, math.ceil(gamma_min * unit))
    hi = math.floor(gamma_max * unit)
    ps = valid_ps(field, ls, N, lo, hi)
    if not ps:
        return []
    chosen = []
    for i in range(count):
        t = gamma_min * (gamma_max / gamma_min) ** (i / max(count - 1, 1)) * unit
        p = next((x for x in ps if x >= t), ps[-1])
        if p not in chosen:
            chosen.append(p)
    return sorted(chosen)
