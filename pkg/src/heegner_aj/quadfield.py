"""Exact arithmetic in an imaginary quadratic field K = Q(sqrt(-d_K)).

Elements are stored as ``u + v*sqrt(-d_K)`` with rational ``u, v``.  The
module also decides splitting of primes, the Heegner hypothesis, the cyclic
ideal of norm N, and conductors of quadratic orders.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce

from sympy import factorint

from .errors import ValidationError


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a | n)."""
    if n == 0:
        return 1 if abs(a) == 1 else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    twos = 0
    while n % 2 == 0:
        n //= 2
        twos += 1
    if twos:
        if a % 2 == 0:
            return 0
        if twos % 2 and a % 8 in (3, 5):
            result = -result
    # Jacobi symbol (a | n) for odd n > 0
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def fundamental_discriminant(D: int) -> tuple[int, int]:
    """Split a discriminant ``D = c**2 * D0`` with ``D0`` fundamental; return ``(D0, c)``."""
    if D % 4 not in (0, 1) or D == 0:
        raise ValidationError(f"{D} is not a discriminant", module="quadfield")
    sign = -1 if D < 0 else 1
    square = 1
    free = sign
    for p, e in factorint(abs(D)).items():
        square *= p ** (e // 2)
        free *= p ** (e % 2)
    # free is squarefree; repair the 2-part so that D0 = 1 mod 4 or D0 = 4m with m = 2, 3 mod 4
    if free % 4 == 1:
        D0, c = free, square
    else:
        if square % 2:
            raise ValidationError(f"{D} is not a discriminant", module="quadfield")
        D0, c = 4 * free, square // 2
    return D0, c


def is_fundamental(D: int) -> bool:
    try:
        return fundamental_discriminant(D)[1] == 1
    except ValidationError:
        return False


@dataclass(frozen=True)
class FieldElement:
    """``u + v*sqrt(-d)`` with exact rationals."""

    u: Fraction
    v: Fraction
    d: int

    def __post_init__(self):
        object.__setattr__(self, "u", Fraction(self.u))
        object.__setattr__(self, "v", Fraction(self.v))

    def _coerce(self, other):
        if isinstance(other, FieldElement):
            if other.d != self.d:
                raise ValidationError("elements of different fields", module="quadfield")
            return other
        if isinstance(other, (int, Fraction)):
            return FieldElement(Fraction(other), Fraction(0), self.d)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return FieldElement(self.u + other.u, self.v + other.v, self.d)

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(-self.u, -self.v, self.d)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return FieldElement(
            self.u * other.u - self.d * self.v * other.v,
            self.u * other.v + self.v * other.u,
            self.d,
        )

    __rmul__ = __mul__

    def conjugate(self):
        return FieldElement(self.u, -self.v, self.d)

    def norm(self) -> Fraction:
        return self.u**2 + self.d * self.v**2

    def trace(self) -> Fraction:
        return 2 * self.u

    def inverse(self):
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero")
        c = self.conjugate()
        return FieldElement(c.u / n, c.v / n, self.d)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def imag_coefficient(self) -> Fraction:
        """Im(x) / sqrt(d)."""
        return self.v

    def to_complex(self, mp):
        """Complex value in the given mpmath context."""
        return mp.mpc(mp.mpf(self.u.numerator) / self.u.denominator,
                      mp.mpf(self.v.numerator) / self.v.denominator * mp.sqrt(self.d))

    def __complex__(self):
        return complex(float(self.u), float(self.v) * math.sqrt(self.d))


@dataclass(frozen=True)
class ImagQuadField:
    """K = Q(sqrt(-d_K)) with -d_K a fundamental discriminant."""

    d_K: int

    def __post_init__(self):
        if self.d_K <= 0:
            raise ValidationError("d_K must be positive", module="quadfield")
        if not is_fundamental(-self.d_K):
            raise ValidationError(f"-{self.d_K} is not a fundamental discriminant", module="quadfield")

    @property
    def u_K(self) -> int:
        return {3: 3, 4: 2}.get(self.d_K, 1)

    @property
    def tau(self) -> FieldElement:
        """Standard generator (-d_K + sqrt(-d_K))/2 of the maximal order."""
        return FieldElement(Fraction(-self.d_K, 2), Fraction(1, 2), self.d_K)

    def element(self, u, v) -> FieldElement:
        return FieldElement(Fraction(u), Fraction(v), self.d_K)

    def splitting_type(self, q: int) -> str:
        return splitting_type(q, self.d_K)


def _require_field(d_K: int):
    if d_K <= 0 or not is_fundamental(-d_K):
        raise ValidationError(f"-{d_K} is not a fundamental discriminant", module="quadfield")


def heegner_hypothesis(d_K: int, N: int) -> bool:
    """True iff every prime dividing ``N`` splits in Q(sqrt(-d_K))."""
    _require_field(d_K)
    if N < 1:
        raise ValidationError("N must be positive", module="quadfield")
    if math.gcd(N, d_K) != 1:
        raise ValidationError(f"gcd(N, d_K) = {math.gcd(N, d_K)} is not 1", module="quadfield")
    return all(kronecker(-d_K, p) == 1 for p in factorint(N))


@dataclass(frozen=True)
class CyclicIdeal:
    """The ideal (N, (b + sqrt(-d_K))/2) with quotient Z/NZ."""

    N: int
    b: int
    d_K: int

    def contains(self, x: FieldElement) -> bool:
        """Membership test for an element of the maximal order."""
        # basis N, (b + sqrt(-d))/2 ; solve x = s*N + t*(b + sqrt(-d))/2
        t = 2 * x.v
        s = (x.u - t * Fraction(self.b, 2)) / self.N
        return t.denominator == 1 and s.denominator == 1


def find_cyclic_ideal(d_K: int, N: int) -> CyclicIdeal:
    """Least ``b`` in ``[0, 2N)`` with ``b^2 = -d_K (mod 4N)``."""
    if N < 5:
        raise ValidationError(f"N must be at least 5, got {N}", module="quadfield")
    if not heegner_hypothesis(d_K, N):
        raise ValidationError(f"Heegner hypothesis fails for d_K={d_K}, N={N}", module="quadfield")
    for b in range(2 * N):
        if (b * b + d_K) % (4 * N) == 0:
            return CyclicIdeal(N, b, d_K)
    raise ValidationError(f"no b with b^2 = -{d_K} mod {4 * N}", module="quadfield")


def splitting_type(q: int, d_K: int) -> str:
    """'split', 'inert' or 'ramified' for an odd prime ``q``."""
    if q % 2 == 0 or q < 3:
        raise ValidationError(f"q must be an odd prime, got {q}", module="quadfield")
    if d_K % q == 0:
        return "ramified"
    return "split" if kronecker(-d_K, q) == 1 else "inert"


def minimal_quadratic(x: FieldElement) -> tuple[int, int, int]:
    """Primitive ``(A, B, C)`` with ``A > 0`` and ``A x^2 + B x + C = 0``."""
    if x.v == 0:
        raise ValidationError("minimal_quadratic needs an irrational element", module="quadfield")
    coeffs = [Fraction(1), -x.trace(), x.norm()]
    den = reduce(math.lcm, (c.denominator for c in coeffs))
    ints = [int(c * den) for c in coeffs]
    g = reduce(math.gcd, ints)
    return tuple(c // g for c in ints)


def conductor_of_quadratic(A: int, B: int, C: int, d_K: int | None = None) -> int:
    """Conductor of the order of discriminant ``B^2 - 4AC``.

    When ``d_K`` is given, the fundamental part must equal ``-d_K``.
    """
    if A <= 0:
        raise ValidationError("leading coefficient must be positive", module="quadfield")
    if math.gcd(math.gcd(A, B), C) != 1:
        raise ValidationError(f"({A}, {B}, {C}) is not primitive", module="quadfield")
    D = B * B - 4 * A * C
    if D >= 0:
        raise ValidationError(f"discriminant {D} is not negative", module="quadfield")
    D0, c = fundamental_discriminant(D)
    if d_K is not None and D0 != -d_K:
        raise ValidationError(
            f"discriminant {D} has fundamental part {D0}, expected {-d_K}", module="quadfield"
        )
    return c
