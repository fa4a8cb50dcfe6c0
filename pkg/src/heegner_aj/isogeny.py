"""Explicit CM points attached to cyclic q- and pq-isogenies.

Points of P^1(F_q) are represented by an integer in ``[0, q)`` or by
``INF`` (``math.inf``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import ValidationError
from .quadfield import (
    CyclicIdeal,
    FieldElement,
    ImagQuadField,
    conductor_of_quadratic,
    minimal_quadratic,
    splitting_type,
)

INF = math.inf


def _is_small_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % p for p in range(2, math.isqrt(n) + 1))


def _normalize_beta(beta, q: int):
    if beta == INF or beta in ("inf", "oo", "∞", None):
        return INF
    return int(beta) % q


@dataclass(frozen=True)
class LevelStructure:
    """``t = (c tau + d)/N`` together with a completion ``gamma = (a b; c d)`` in SL2(Z)."""

    a: int
    b: int
    c: int
    d: int
    N: int

    @property
    def gamma(self):
        return ((self.a, self.b), (self.c, self.d))

    def norm_ctd(self, field: ImagQuadField) -> int:
        """|c tau + d|^2, an integer."""
        n = (self.c * field.tau + self.d).norm()
        assert n.denominator == 1
        return int(n)

    def gamma_tau(self, field: ImagQuadField) -> FieldElement:
        tau = field.tau
        return (self.a * tau + self.b) / (self.c * tau + self.d)

    def generates(self, field: ImagQuadField, ideal: CyclicIdeal) -> bool:
        """Whether ``t`` generates the N-torsion cut out by ``ideal``.

        ``A[ideal] = ideal^{-1}/O_K`` so this asks for ``c tau + d`` to lie in
        the conjugate ideal ``N * ideal^{-1}``.
        """
        conj = CyclicIdeal(ideal.N, (-ideal.b) % (2 * ideal.N), ideal.d_K)
        return conj.contains(self.c * field.tau + self.d)


def level_structure_from_t(c: int, d: int, N: int) -> LevelStructure:
    """Complete ``(c, d)`` to a matrix in SL2(Z).

    For ``c = 1`` the completion is ``(1, d-1; 1, d)``.  Otherwise ``d`` is
    shifted by the smallest multiple of ``N`` making ``gcd(c, d) = 1`` and
    the solution with least ``|b|`` (then least ``|a|``) is returned.
    """
    if N < 5:
        raise ValidationError(f"N must be at least 5, got {N}", module="isogeny")
    if math.gcd(math.gcd(c, d), N) != 1:
        raise ValidationError(f"gcd(c, d, N) = gcd({c}, {d}, {N}) is not 1", module="isogeny")
    if c % N == 0:
        raise ValidationError(f"c = {c} is divisible by N = {N}", module="isogeny")
    if c == 1:
        return LevelStructure(1, d - 1, 1, d, N)
    shift = 0
    while True:
        cands = [d + shift * N] if shift == 0 else [d + shift * N, d - shift * N]
        found = [dd for dd in cands if math.gcd(c, dd) == 1]
        if found:
            d = min(found, key=lambda x: (abs(x - d), x))
            break
        shift += 1
    # a d - b c = 1; the solutions are (a0 + k c, b0 + k d)
    _, a0, t0 = _egcd(d, c)
    b0 = -t0
    k0 = round(-b0 / d) if d else round(-a0 / c)
    sols = [(a0 + k * c, b0 + k * d) for k in range(k0 - 2, k0 + 3)]
    a, b = min(sols, key=lambda ab: (abs(ab[1]), abs(ab[0]), ab[1], ab[0]))
    return LevelStructure(a, b, c, d, N)


def _egcd(x: int, y: int):
    """Return (g, s, t) with s*x + t*y = g = gcd(x, y)."""
    s0, s1, t0, t1 = 1, 0, 0, 1
    while y:
        k = x // y
        x, y = y, x - k * y
        s0, s1 = s1, s0 - k * s1
        t0, t1 = t1, t0 - k * t1
    if x < 0:
        x, s0, t0 = -x, -s0, -t0
    return x, s0, t0


@dataclass(frozen=True)
class CMPoint:
    """A CM point tau' in the upper half-plane with its isogeny bookkeeping.

    ``multiplier`` is the integer ``m`` with ``phi(t) = m/N`` modulo the target
    lattice; ``None`` when no level structure is attached.
    """

    value: FieldElement
    degree: int
    conductor: int
    kappa: int
    gamma_scale: Fraction
    beta: object
    q: int
    p: int | None = None
    level: LevelStructure | None = None
    multiplier: int | None = None

    @property
    def X(self) -> Fraction:
        return self.value.u

    def normalized(self) -> bool:
        """phi(t) = 1/N, the normalisation needed by the Abel-Jacobi formula."""
        return self.level is not None and (self.multiplier - 1) % self.level.N == 0

    def Y(self, mp):
        return mp.mpf(self.value.v.numerator) / self.value.v.denominator * mp.sqrt(self.value.d)


def _conductor(field: ImagQuadField, x: FieldElement) -> int:
    return conductor_of_quadratic(*minimal_quadratic(x), d_K=field.d_K)


def _check_q(field: ImagQuadField, q: int):
    if q < 3 or q % 2 == 0 or not _is_small_prime(q):
        raise ValidationError(f"q = {q} must be an odd prime", module="isogeny")
    if field.d_K % q == 0:
        raise ValidationError(f"q = {q} divides d_K; ramified primes are not covered", module="isogeny")


def tau_q_beta(field: ImagQuadField, q: int, beta) -> CMPoint:
    """``q tau`` for beta = oo, else ``(tau + beta)/q``."""
    _check_q(field, q)
    beta = _normalize_beta(beta, q)
    tau = field.tau
    if beta == INF:
        value, scale, kappa = q * tau, Fraction(q), 1
    else:
        value, scale, kappa = (tau + beta) / q, Fraction(1, q), q
    return CMPoint(value, q, _conductor(field, value), kappa, scale, beta, q)


def tau_t(field: ImagQuadField, ls: LevelStructure, q: int, beta) -> CMPoint:
    """``q gamma(tau)`` for beta = oo, else ``(gamma(tau) + beta)/q``."""
    _check_q(field, q)
    if ls.c % q == 0:
        raise ValidationError(f"q = {q} divides c = {ls.c}", module="isogeny")
    beta = _normalize_beta(beta, q)
    g = ls.gamma_tau(field)
    if beta == INF:
        value, scale, kappa, mult = q * g, Fraction(q), 1, q
    else:
        value, scale, kappa, mult = (g + beta) / q, Fraction(1, q), q, 1
    conductor = _conductor(field, value)
    if splitting_type(q, field.d_K) == "inert" and conductor != q:
        raise ArithmeticError(f"conductor {conductor} != {q} for inert q at beta={beta}")
    return CMPoint(value, q, conductor, kappa, scale, beta, q, None, ls, mult)


def tau_pq_t(field: ImagQuadField, ls: LevelStructure, p: int, q: int, beta) -> CMPoint:
    """``p * tau_t(q, beta)``: the target of the composite pq-isogeny."""
    base = tau_t(field, ls, q, beta)
    if p < 3 or p % 2 == 0 or not _is_small_prime(p) or p == q:
        raise ValidationError(f"p = {p} must be an odd prime distinct from q = {q}", module="isogeny")
    bad = math.gcd(p, ls.c * field.d_K * ls.N * ls.norm_ctd(field))
    if bad != 1:
        raise ValidationError(
            f"p = {p} divides c*d_K*N*|c tau + d|^2 = {ls.c * field.d_K * ls.N * ls.norm_ctd(field)}",
            module="isogeny",
        )
    if math.gcd(q, ls.N) != 1:
        raise ValidationError(f"q = {q} divides N = {ls.N}", module="isogeny")
    value = p * base.value
    conductor = _conductor(field, value)
    if splitting_type(q, field.d_K) == "inert" and conductor != p * q:
        raise ArithmeticError(f"conductor {conductor} != {p * q} for inert q at beta={base.beta}")
    beta = base.beta
    scale = Fraction(p * q) if beta == INF else Fraction(p, q)
    return CMPoint(value, p * q, conductor, base.kappa, scale, beta, q, p, ls, p * base.multiplier)


def kernel_match(ls: LevelStructure, q: int, beta):
    """The beta' with ``psi^t_{q,beta}`` isomorphic to ``phi_{q,beta'}``."""
    if ls.c % q == 0:
        raise ValidationError(f"q = {q} divides c = {ls.c}", module="isogeny")
    a, b, c, d = ls.a, ls.b, ls.c, ls.d
    beta = _normalize_beta(beta, q)
    if beta == INF:
        return pow(c, -1, q) * d % q
    lead = (a + c * beta) % q
    if lead == 0:
        return INF
    return pow(lead, -1, q) * (b + d * beta) % q


def p1(q: int):
    """P^1(F_q) in canonical order: 0, 1, ..., q-1, oo."""
    return list(range(q)) + [INF]


@dataclass(frozen=True)
class IsogenyCensus:
    q: int
    splitting: str
    rows: tuple  # (beta, conductor) pairs
    raw_count: int
    maximal_count: int
    conductor_q_count: int
    class_count: int


def enumerate_isogeny_classes(field: ImagQuadField, q: int) -> IsogenyCensus:
    """Conductors of all q+1 lattices ``<1, tau_{q,beta}>``.

    ``class_count`` counts isomorphism classes of the conductor-q isogenies
    after identifying by ``O_K^x / {+-1}``: ``(q+1)/u_K`` for inert ``q`` and
    ``(q-1)/u_K`` for split ``q``.
    """
    _check_q(field, q)
    kind = splitting_type(q, field.d_K)
    rows = tuple((beta, tau_q_beta(field, q, beta).conductor) for beta in p1(q))
    maximal = sum(1 for _, c in rows if c == 1)
    at_q = sum(1 for _, c in rows if c == q)
    if kind == "inert" and at_q != q + 1:
        raise ArithmeticError(f"inert q={q}: only {at_q} of {q + 1} points have conductor q")
    if kind == "split" and maximal != 2:
        raise ArithmeticError(f"split q={q}: {maximal} points with conductor 1, expected 2")
    return IsogenyCensus(q, kind, rows, len(rows), maximal, at_q, at_q // field.u_K)
