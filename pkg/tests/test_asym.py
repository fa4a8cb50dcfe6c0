import random
from fractions import Fraction

import pytest

from heegner_aj.aj import aj_constant, kernel_integral
from heegner_aj.asym import (
    I_closed,
    P_polynomial,
    datum,
    gamma_kappa,
    lem_est_bound,
    point_XY,
    ratio_J,
    ratio_J_direct,
    sweep_row,
)
from heegner_aj.errors import ValidationError
from heegner_aj.isogeny import INF, level_structure_from_t, tau_pq_t
from heegner_aj.modforms import cusp_constant
from heegner_aj.numerics import PrecisionContext
from heegner_aj.primes import index_stream

from oracles import kernel_quad


def test_gamma_kappa_examples():
    assert gamma_kappa(13, 7, INF) == (91, 1)
    assert gamma_kappa(13, 7, 3) == (Fraction(13, 7), 7)


def test_Y_example(K11, ls11):
    mp = PrecisionContext(128).mp
    X, Y = point_XY(K11, ls11, 13, 7, INF, mp)
    assert abs(Y - 91 * mp.sqrt(11) / 46) < mp.ldexp(1, -124)
    assert X == 91 * Fraction(55, 46)


def test_datum_matches_cm_point(K11, ls11):
    mp = PrecisionContext(128).mp
    for beta in (INF, 0, 7, 40):
        d = datum(K11, ls11, 1, 61, 41, beta)
        P = tau_pq_t(K11, ls11, 61, 41, beta)
        assert d.X == P.X
        assert abs(d.Y - P.Y(mp)) < mp.ldexp(1, -120) * d.Y
        assert d.gamma == P.gamma_scale and d.kappa == P.kappa


def test_datum_rejects_invalid_pair(K11, ls11):
    with pytest.raises(ValidationError):
        datum(K11, ls11, 1, 29, 7, INF)


def test_I_closed_r0(K11, ls11):
    ctx = PrecisionContext(128)
    mp = ctx.mp
    I = I_closed(K11, ls11, 0, 61, 41, 3, ctx)
    _, Y = point_XY(K11, ls11, 61, 41, 3, PrecisionContext(256).mp)
    assert I.contains(mp.exp(-2 * mp.pi * Y) / (2 * mp.pi))


@pytest.mark.parametrize("r", (1, 2, 3))
def test_I_closed_vs_quadrature(K11, ls11, r):
    ctx = PrecisionContext(128)
    I = I_closed(K11, ls11, r, 131, 41, 5, ctx)
    _, Y = point_XY(K11, ls11, 131, 41, 5, ctx.mp)
    Q = kernel_quad(r, 1, Y, ctx.relative(I.center.real, 120))
    assert abs(Q.center - I.center) <= Q.radius + I.radius + 1e-30 * I.center.real


def test_I_closed_equals_kernel_sample(K11, ls11):
    ctx = PrecisionContext(128)
    rng = random.Random(3)
    pairs = list(index_stream(K11, ls11, 5, 500))
    for _ in range(10):
        pr = rng.choice(pairs)
        r = rng.randint(0, 3)
        beta = rng.choice([INF, 0, 1, pr.q - 1])
        d = datum(K11, ls11, r, pr.p, pr.q, beta, ctx)
        Ic = I_closed(K11, ls11, r, pr.p, pr.q, beta, ctx)
        assert abs(d.I.center - Ic.center) <= 4 * ctx.target_eps


def test_P_polynomial_r0(K11, ls11):
    mp = PrecisionContext(128).mp
    P = P_polynomial(K11, ls11, 0)
    assert P.weights == (1,) and P.degree == 0
    assert abs(P(5, mp) - 1 / (2 * mp.pi)) < mp.ldexp(1, -120)


def test_P_polynomial_identity(K11, ls11):
    ctx = PrecisionContext(128)
    mp = ctx.mp
    rng = random.Random(11)
    h = mp.sqrt(11) / 46
    for r in (1, 2, 3):
        P = P_polynomial(K11, ls11, r, ctx)
        assert P.degree == r  # the Y^{2r}..Y^{r+1} terms cancel
        for _ in range(20):
            g = Fraction(rng.randint(1, 4000), rng.randint(1, 40))
            gm = mp.mpf(g.numerator) / g.denominator
            lhs = P(g, mp) * mp.exp(-2 * mp.pi * h * gm)
            E = kernel_integral(r, 1, h * gm, ctx)
            assert abs(lhs - E.center) <= 1e-30 * E.center.real


def test_P_polynomial_weights_r2(K11, ls11):
    assert P_polynomial(K11, ls11, 2).weights == (24, 24, 8, 0, 0)


def test_J_equals_leading_term_of_representative(K11, ls11):
    """|J| and its phase agree with constant * (first term of the line integral)."""
    ctx = PrecisionContext(128)
    mp = ctx.mp
    for beta in (INF, 0, 17):
        d = datum(K11, ls11, 1, 131, 41, beta, ctx)
        P = tau_pq_t(K11, ls11, 131, 41, beta)
        const = aj_constant(K11, 5, P.degree, 1, P.value.v).ball(ctx).center
        E = kernel_integral(1, 1, d.Y, ctx).center
        term = -1j * (-1) ** 1 * mp.expjpi(2 * mp.mpf(d.X.numerator) / d.X.denominator) * E
        lead = const * term
        assert abs(d.J - lead) <= 1e-30 * abs(lead)


def test_ratio_formula_matches_direct(K11, ls11):
    ctx = PrecisionContext(128)
    for pr in list(index_stream(K11, ls11, 5, 400))[:6]:
        a = ratio_J(K11, ls11, 1, pr.p, pr.q, 2, ctx)
        b = ratio_J_direct(K11, ls11, 1, pr.p, pr.q, 2, ctx)
        assert abs(a - b) <= 1e-12 * b


def test_ratio_decreases_in_p(K11, ls11):
    vals = [ratio_J(K11, ls11, 1, p, 41, 0) for p in (61, 131, 151, 211, 241, 251, 271)]
    assert all(x > y for x, y in zip(vals, vals[1:]))
    assert vals[-1] < 1e-100


def test_ratio_needs_finite_beta(K11, ls11):
    with pytest.raises(ValidationError):
        ratio_J(K11, ls11, 1, 61, 41, INF)


def test_lem_est_bound_example(K11, ls11):
    mp = PrecisionContext(64).mp
    b = lem_est_bound(K11, ls11, 1, 13, 7, INF, 3)
    expected = 3 * mp.exp(-91 * mp.pi * mp.sqrt(11) / 23)
    assert expected <= b <= expected * (1 + 1e-15)
    bounds = [lem_est_bound(K11, ls11, 1, p, 41, 0, 3) for p in (61, 421, 4231)]
    assert bounds[0] > bounds[1] > bounds[2]


def test_sweep_rows_within_bound(newform, K11, ls11):
    ctx = PrecisionContext(128)
    _, y0 = point_XY(K11, ls11, 421, 41, 0, ctx.mp)
    c = cusp_constant(newform, y0)
    rows = [sweep_row(newform, K11, ls11, p, 41, 0, c, ctx) for p in (421, 1151, 4231)]
    assert all(r.within_bound for r in rows)
    errs = [r.rel_err for r in rows]
    assert errs[0] > errs[1] > errs[2] > 0


def test_other_level_structure(K11):
    ls = level_structure_from_t(2, 1, 5)
    ctx = PrecisionContext(128)
    pr = next(iter(index_stream(K11, ls, 5, 400)))
    d = datum(K11, ls, 1, pr.p, pr.q, 0, ctx)
    assert d.norm_ctd == ls.norm_ctd(K11)
    Ic = I_closed(K11, ls, 1, pr.p, pr.q, 0, ctx)
    assert abs(d.I.center - Ic.center) <= 4 * ctx.target_eps
