import json

import pytest

from heegner_aj.errors import InsufficientCoefficients, NewformParseError, ValidationError
from heegner_aj.modforms import (
    Newform,
    coefficient_majorant,
    cusp_constant,
    envelope,
    eval as f_eval,
    parse_newform,
    series_terms,
)
from heegner_aj.numerics import PrecisionContext


def _write(tmp_path, data, raw=None):
    p = tmp_path / "f.json"
    p.write_text(raw if raw is not None else json.dumps(data, indent=1))
    return p


def _base(newform):
    return {"level": 5, "weight": 4, "label": "t", "fricke": 1, "coefficients": list(newform.coefficients[:40])}


def test_fixture_parses(newform):
    assert (newform.level, newform.weight, newform.fricke) == (5, 4, 1)
    assert len(newform) >= 200
    assert newform.coefficients[:4] == (1, -4, 2, 8)
    assert (newform.k, newform.r) == (2, 1)


def test_fixture_hecke_relations(newform):
    a = newform.coefficients
    # multiplicativity and the prime-power recursion a_{p^2} = a_p^2 - p^3 (p != 5)
    for m, n in ((2, 3), (3, 7), (4, 9), (7, 11)):
        assert a[m * n - 1] == a[m - 1] * a[n - 1]
    for p in (2, 3, 7, 11, 13):
        assert a[p * p - 1] == a[p - 1] ** 2 - p**3


def test_minimal_valid_file(tmp_path, newform):
    f = parse_newform(_write(tmp_path, _base(newform)))
    assert f.coefficients[:2] == (1, -4) and len(f) == 40


def test_decimal_string_coefficients(tmp_path, newform):
    data = _base(newform)
    data["coefficients"] = [str(a) + ".0" for a in data["coefficients"]]
    f = parse_newform(_write(tmp_path, data))
    assert float(f.coefficients[1]) == -4


@pytest.mark.parametrize(
    "mutate,needle",
    [
        (lambda d: d["coefficients"].__setitem__(0, 2), "a_1"),
        (lambda d: d.__setitem__("weight", 5), "odd"),
        (lambda d: d.__setitem__("weight", 2), "below 4"),
        (lambda d: d.__setitem__("level", 4), "below 5"),
        (lambda d: d.__setitem__("extra", 1), "unknown key"),
        (lambda d: d.pop("fricke"), "missing key"),
        (lambda d: d.__setitem__("coefficients", [1, 2]), "only 2"),
        (lambda d: d["coefficients"].__setitem__(5, "abc"), "not a decimal"),
        (lambda d: d["coefficients"].__setitem__(5, 1.5), "integer or decimal"),
        (lambda d: d.__setitem__("fricke", 2), "fricke"),
    ],
)
def test_parse_errors(tmp_path, newform, mutate, needle):
    data = _base(newform)
    mutate(data)
    with pytest.raises(NewformParseError) as info:
        parse_newform(_write(tmp_path, data))
    assert needle in str(info.value)
    assert info.value.module == "modforms" and info.value.code == "parse"


def test_parse_error_reports_line_of_bad_coefficient(tmp_path, newform):
    data = _base(newform)
    data["coefficients"][11] = 10**6  # a_12 far above its majorant
    path = _write(tmp_path, data)
    with pytest.raises(NewformParseError) as info:
        parse_newform(path)
    lines = path.read_text().splitlines()
    assert "1000000" in lines[info.value.line - 1]
    assert str(info.value).startswith(f"line {info.value.line}: ")


def test_parse_invalid_json_line(tmp_path):
    with pytest.raises(NewformParseError) as info:
        parse_newform(_write(tmp_path, None, raw='{\n "level": 5,\n "weight": ,\n}'))
    assert info.value.line == 3


def test_missing_file(tmp_path):
    with pytest.raises(NewformParseError):
        parse_newform(tmp_path / "absent.json")


def test_majorant_examples(newform):
    assert coefficient_majorant(newform, 1) == 1
    assert coefficient_majorant(newform, 6) == pytest.approx(4 * 6**1.5)
    g = Newform(5, 4, "g", newform.coefficients[:20], 1, majorant=10)
    assert coefficient_majorant(g, 2) == pytest.approx(10 * 2**1.5)
    assert envelope(g) == (10.0, 1.5)


def test_stored_coefficients_within_majorant(newform):
    for n, a in enumerate(newform.coefficients, 1):
        assert abs(a) <= coefficient_majorant(newform, n)


def test_eval_leading_term_bound(newform):
    ctx = PrecisionContext(128)
    mp = ctx.mp
    y0 = mp.mpf(1)
    c = cusp_constant(newform, y0)
    for Y in (1, 2, 5, 10):
        v = f_eval(newform, mp.mpc(0, Y), ctx)
        dev = abs(v.center - mp.exp(-2 * mp.pi * Y)) - v.radius
        assert dev <= c * mp.exp(-4 * mp.pi * Y)


def test_eval_periodicity(newform):
    ctx = PrecisionContext(128)
    mp = ctx.mp
    z = mp.mpc(mp.mpf(1) / 8, mp.mpf(1) / 2)
    a = f_eval(newform, z, ctx)
    b = f_eval(newform, z + 1, ctx)
    assert a.overlaps(b)
    assert abs(a.center - b.center) <= a.radius + b.radius


def test_eval_higher_precision_contained(newform):
    lo, hi = PrecisionContext(128), PrecisionContext(256)
    for z in ((0.25, 0.3), (-0.375, 0.125), (0.0, 1.5)):
        a = f_eval(newform, complex(*z), lo)
        b = f_eval(newform, complex(*z), hi)
        assert a.contains_ball(b)


def test_eval_block_reordering(newform):
    """Summing the q-series in reversed blocks of 16 terms stays within 2x the radius."""
    ctx = PrecisionContext(128)
    mp = ctx.mp
    z = mp.mpc(mp.mpf(3) / 16, mp.mpf(1) / 4)
    ball = f_eval(newform, z, ctx)
    q = mp.exp(2j * mp.pi * z)
    n_terms = 600
    blocks = [range(s, min(s + 16, n_terms + 1)) for s in range(1, n_terms + 1, 16)]
    total = mp.mpc(0)
    for block in reversed(blocks):
        total += mp.fsum(newform.coefficients[n - 1] * q**n for n in block)
    assert abs(total - ball.center) <= 2 * ball.radius


def test_eval_insufficient_coefficients(newform):
    g = Newform(5, 4, "short", newform.coefficients[:12], 1)
    with pytest.raises(InsufficientCoefficients) as info:
        f_eval(g, 0.1j, PrecisionContext(128))
    assert info.value.required > 12


def test_eval_below_y_min(newform):
    with pytest.raises(ValidationError):
        f_eval(newform, 0.01j)


def test_series_terms_rejects_non_decay():
    with pytest.raises(ValidationError):
        series_terms(100, (2, 2), 1.0, 1e-10, lambda n: 1.0)


def test_series_terms_tail_is_bound():
    ctx = PrecisionContext(64)
    mp = ctx.mp
    decay = mp.exp(-2 * mp.pi * mp.mpf("0.1"))
    M, tail = series_terms(10**4, (2, 2), decay, mp.mpf("1e-12"), lambda n: 2 * mp.mpf(n) ** 2 * decay**n)
    actual = mp.nsum(lambda n: 2 * n**2 * decay**n, [M + 1, mp.inf])
    assert actual <= tail < 1e-12
