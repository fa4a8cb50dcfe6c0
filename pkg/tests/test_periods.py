import math
from fractions import Fraction

import pytest

from heegner_aj.aj import kernel_integral
from heegner_aj.errors import ValidationError
from heegner_aj.modforms import Newform
from heegner_aj.numerics import PrecisionContext
from heegner_aj.periods import fricke_transform, j_functional, monomial_kernel

from oracles import period_quad


def test_fricke_transform_is_involution():
    for P in ([1], [0, 1], [1, 2, 3], [Fraction(1, 3), 0, -7]):
        for eps in (1, -1):
            once = fricke_transform(P, 5, 2, eps)
            twice = fricke_transform(once, 5, 2, eps)
            assert list(twice) == [Fraction(c) for c in P] + [0] * (len(twice) - len(P))


def test_fricke_transform_coefficients():
    # z -> -eps 5 w^2 P(-1/(5w)) for P = 1 + 2z + 3z^2
    assert fricke_transform([1, 2, 3], 5, 2, 1) == (Fraction(-3, 5), Fraction(2), Fraction(-5))
    with pytest.raises(ValidationError):
        fricke_transform([1, 2, 3, 4], 5, 2, 1)


def test_monomial_kernel_examples():
    ctx = PrecisionContext(128)
    hp = PrecisionContext(256).mp
    for n in (1, 4):
        K = monomial_kernel(0, n, "0.7", ctx)
        assert K.contains(hp.exp(-2 * hp.pi * n * hp.mpf("0.7")) / (2 * hp.pi * n))
    K = monomial_kernel(1, 1, 1, ctx)
    assert K.contains(hp.exp(-2 * hp.pi) * (1 / (2 * hp.pi) + 1 / (4 * hp.pi**2)))


def test_binomial_reassembly_reproduces_kernel():
    ctx = PrecisionContext(128)
    mp = ctx.mp
    for r in (1, 2, 3):
        for Y in (mp.mpf("0.4"), mp.mpf(2)):
            E = kernel_integral(r, 2, Y, ctx)
            parts = [
                math.comb(r, j) * (-Y * Y) ** (r - j) * monomial_kernel(2 * j, 2, Y, ctx).center.real
                for j in range(r + 1)
            ]
            total = mp.fsum(parts)
            scale = max(abs(p) for p in parts)
            assert abs(total - E.center) <= E.radius + scale * mp.ldexp(1, -118)


@pytest.mark.parametrize("P", ([1, 0, 1], [0, 1], [2, -1, 3]))
def test_j_functional_vs_quadrature(newform, P):
    ctx = PrecisionContext(128)
    J = j_functional(newform, P, ctx)
    Q = period_quad(newform, P, ctx.relative(abs(J.integral.center), 100))
    assert abs(Q.center - J.integral.center) <= 1e-10 * abs(J.integral.center)


def test_involution_value(newform):
    ctx = PrecisionContext(128)
    P = [1, 2, 3]
    a = j_functional(newform, P, ctx)
    b = j_functional(newform, fricke_transform(P, 5, 2, newform.fricke), ctx)
    assert abs(a.value.center - b.value.center) <= a.value.radius + b.value.radius


def test_parity_symmetry(newform):
    ctx = PrecisionContext(128)
    mp = ctx.mp
    for m in range(3):
        J = j_functional(newform, [0] * m + [1], ctx)
        scale = (2j * mp.pi) ** 3
        v = J.value.center / scale
        rad = J.value.radius / abs(scale)
        off = v.imag if m % 2 else v.real
        assert abs(off) <= rad
        assert abs(v) > 10 * rad


def test_linearity(newform):
    ctx = PrecisionContext(128)
    a = j_functional(newform, [1, 0, 2], ctx).value
    b = j_functional(newform, [0, 5], ctx).value
    s = j_functional(newform, [1, 5, 2], ctx).value
    assert abs(s.center - a.center - b.center) <= a.radius + b.radius + s.radius


def test_needs_fricke(newform):
    g = Newform(5, 4, "nofricke", newform.coefficients, None)
    with pytest.raises(ValidationError) as info:
        j_functional(g, [1])
    assert info.value.code == "fricke"


def test_degree_bound(newform):
    with pytest.raises(ValidationError):
        j_functional(newform, [0, 0, 0, 1])
