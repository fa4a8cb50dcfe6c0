"""Newform q-expansions: ingestion, coefficient majorants, rigorous evaluation.

Newform file format (UTF-8 JSON, no other top-level keys allowed)::

    {"level": 5, "weight": 4, "label": "5.4.a.a", "fricke": 1,
     "coefficients": [1, -4, 2, ...]}

``coefficients[i]`` is ``a_{i+1}``; entries are integers or decimal strings
(a real embedding of the Hecke eigenvalues).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from sympy import divisor_count

from .errors import InsufficientCoefficients, NewformParseError, ValidationError
from .numerics import BallComplex, PrecisionContext, round_exact, to_mpc, to_mpf, up_add, up_mul

REQUIRED_KEYS = ("level", "weight", "label", "fricke", "coefficients")
MIN_COEFFICIENTS = 10
DEFAULT_Y_MIN = 0.05


@dataclass(frozen=True)
class Newform:
    """A normalised newform given by its first ``M`` Fourier coefficients.

    ``majorant`` is ``"deligne"`` (|a_n| <= d(n) n^((w-1)/2)) or a positive
    number ``c`` meaning |a_n| <= c n^((w-1)/2).
    """

    level: int
    weight: int
    label: str
    coefficients: tuple
    fricke: int | None = None
    majorant: object = "deligne"
    _cache: dict = field(default_factory=dict, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if self.weight % 2 or self.weight < 4:
            raise ValidationError(f"weight must be even and >= 4, got {self.weight}", module="modforms")
        if self.level < 5:
            raise ValidationError(f"level must be >= 5, got {self.level}", module="modforms")
        if len(self.coefficients) < MIN_COEFFICIENTS:
            raise ValidationError(f"need at least {MIN_COEFFICIENTS} coefficients", module="modforms")
        if str(self.coefficients[0]) != "1" and _as_float(self.coefficients[0]) != 1:
            raise ValidationError("a_1 must be 1", module="modforms")
        if self.fricke not in (None, 1, -1):
            raise ValidationError("fricke must be +1, -1 or None", module="modforms")
        if self.majorant != "deligne":
            if not float(self.majorant) > 0:
                raise ValidationError("explicit majorant constant must be positive", module="modforms")
        for n, a in enumerate(self.coefficients, 1):
            if abs(_as_float(a)) > coefficient_majorant(self, n) * (1 + 1e-12):
                raise ValidationError(f"|a_{n}| = {a} exceeds its majorant", module="modforms", index=n)

    @property
    def k(self) -> int:
        return self.weight - 2

    @property
    def r(self) -> int:
        return (self.weight - 2) // 2

    def __len__(self):
        return len(self.coefficients)

    def coefficients_mp(self, ctx: PrecisionContext):
        """Coefficients as ints or context mpf (cached per precision)."""
        key = ctx.bits
        if key not in self._cache:
            self._cache[key] = tuple(
                a if isinstance(a, int) else to_mpf(ctx.mp, a) for a in self.coefficients
            )
        return self._cache[key]


def _as_float(a) -> float:
    return float(a)


def coefficient_majorant(f: Newform, n: int) -> float:
    """Bound for |a_n|: ``d(n) n^((w-1)/2)`` (Deligne) or ``c n^((w-1)/2)``."""
    if n < 1:
        raise ValidationError("n must be >= 1", module="modforms")
    if f.majorant == "deligne":
        return int(divisor_count(n)) * n ** ((f.weight - 1) / 2)
    return float(f.majorant) * n ** ((f.weight - 1) / 2)


def envelope(f: Newform):
    """``(C, e)`` with ``|a_n| <= C n^e`` for every n, used for tails.

    In Deligne mode ``d(n) <= 2 sqrt(n)`` absorbs the divisor function.
    """
    if f.majorant == "deligne":
        return 2.0, f.weight / 2
    return float(f.majorant), (f.weight - 1) / 2


def _line_of_key(text: str, key: str):
    idx = text.find(f'"{key}"')
    return text.count("\n", 0, idx) + 1 if idx >= 0 else None


def _line_of_item(text: str, key: str, index: int):
    """Line of the ``index``-th array entry under ``key``."""
    pos = text.find(f'"{key}"')
    if pos < 0:
        return None
    pos = text.find("[", pos)
    count, in_str, i = 0, False, pos + 1
    while i < len(text):
        ch = text[i]
        if in_str:
            if ch == "\\":
                i += 1
            elif ch == '"':
                in_str = False
        elif ch == '"':
            in_str = True
        elif ch == ",":
            count += 1
        elif ch == "]":
            break
        if count == index and not ch.isspace() and ch not in ",":
            return text.count("\n", 0, i) + 1
        i += 1
    return None


def parse_newform(path, majorant="deligne") -> Newform:
    """Read and validate a newform JSON file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise NewformParseError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NewformParseError(exc.msg, line=exc.lineno) from exc
    if not isinstance(data, dict):
        raise NewformParseError("top level must be an object", line=1)
    for key in data:
        if key not in REQUIRED_KEYS:
            raise NewformParseError(f"unknown key {key!r}", line=_line_of_key(text, key))
    for key in REQUIRED_KEYS:
        if key not in data:
            raise NewformParseError(f"missing key {key!r}", line=1)
    level, weight = data["level"], data["weight"]
    for key in ("level", "weight"):
        if not isinstance(data[key], int) or isinstance(data[key], bool):
            raise NewformParseError(f"{key} must be an integer", line=_line_of_key(text, key))
    if weight % 2:
        raise NewformParseError(f"weight {weight} is odd", line=_line_of_key(text, "weight"))
    if weight < 4:
        raise NewformParseError(f"weight {weight} is below 4", line=_line_of_key(text, "weight"))
    if level < 5:
        raise NewformParseError(f"level {level} is below 5", line=_line_of_key(text, "level"))
    if not isinstance(data["label"], str):
        raise NewformParseError("label must be a string", line=_line_of_key(text, "label"))
    fricke = data["fricke"]
    if fricke not in (None, 1, -1) or isinstance(fricke, bool):
        raise NewformParseError("fricke must be 1, -1 or null", line=_line_of_key(text, "fricke"))
    raw = data["coefficients"]
    if not isinstance(raw, list):
        raise NewformParseError("coefficients must be a list", line=_line_of_key(text, "coefficients"))
    def where(i):
        return _line_of_item(text, "coefficients", i)

    coeffs = []
    for i, a in enumerate(raw):
        if isinstance(a, bool) or not isinstance(a, (int, str)):
            raise NewformParseError(f"a_{i + 1} must be an integer or decimal string", line=where(i))
        if isinstance(a, str):
            try:
                value = float(a)
            except ValueError:
                raise NewformParseError(f"a_{i + 1} = {a!r} is not a decimal", line=where(i)) from None
            if not math.isfinite(value):
                raise NewformParseError(f"a_{i + 1} is not finite", line=where(i))
        coeffs.append(a)
    if len(coeffs) < MIN_COEFFICIENTS:
        raise NewformParseError(
            f"only {len(coeffs)} coefficients, need {MIN_COEFFICIENTS}", line=_line_of_key(text, "coefficients")
        )
    if float(coeffs[0]) != 1:
        raise NewformParseError(f"a_1 = {coeffs[0]} but the form must be normalised", line=where(0))
    try:
        return Newform(level, weight, data["label"], tuple(coeffs), fricke, majorant)
    except ValidationError as exc:
        index = getattr(exc, "index", None)
        line = where(index - 1) if index else _line_of_key(text, "coefficients")
        raise NewformParseError(exc.detail, line=line) from exc


def series_terms(available: int, env, decay, eps, term_bound, label="series"):
    """Choose the truncation point of a q-series.

    ``term_bound(n)`` bounds the n-th term using the envelope ``env = (C, e)``,
    and consecutive kernels shrink at least by ``decay`` (< 1).  Stops at the
    least M with ``term_bound(M+1) < eps/4`` and envelope ratio below 1/2, so
    that ``2 * term_bound(M+1)`` bounds the tail.  When ``decay >= 1/2`` the
    ratio can never drop below 1/2; then the geometric factor ``1/(1 - ratio)``
    replaces 2.  Returns ``(M, tail)``.
    """
    _, e = env
    if not decay < 1:
        raise ValidationError("series terms do not decay", module="modforms")
    n = 1
    while True:
        nxt = term_bound(n + 1)
        ratio = ((n + 2) / (n + 1)) ** e * decay
        if ratio < 1:
            factor = 2 if ratio < 0.5 else 1 / (1 - ratio)
            if nxt * factor < eps / 2:
                break
        n += 1
        if n > 10**6:
            raise InsufficientCoefficients(f"{label}: series converges too slowly", required=n)
    if n > available:
        raise InsufficientCoefficients(f"{label}: need {n} coefficients, have {available}", required=n)
    return n, nxt * factor


def eval(f: Newform, z, ctx: PrecisionContext | None = None, y_min=DEFAULT_Y_MIN) -> BallComplex:
    """``f(z) = sum a_n e^{2 pi i n z}`` with a rigorous truncation bound."""
    ctx = ctx or PrecisionContext()
    mp = ctx.mp
    z = to_mpc(mp, z)
    y = z.imag
    if y < y_min:
        raise ValidationError(f"Im z = {mp.nstr(y, 6)} below y_min = {y_min}", module="modforms")
    C, e = envelope(f)
    rate = 2 * mp.pi * y
    decay = mp.exp(-rate)
    M, tail = series_terms(len(f), (C, e), decay, ctx.target_eps,
                           lambda n: C * mp.mpf(n) ** e * mp.exp(-rate * n), f.label)
    wctx = ctx.with_bits(ctx.bits + 24 + M.bit_length())
    wmp = wctx.mp
    zw = to_mpc(wmp, z)
    q = wmp.exp(2j * wmp.pi * zw)
    coeffs = f.coefficients_mp(wctx)
    total = wmp.mpc(0)
    mag = wmp.mpf(0)
    qn = wmp.mpc(1)
    # relative error of a_n q^n is at most ~ n (8 + 8|z|) ulp; summation adds M ulp
    weight = 8 + 8 * abs(zw)
    for n in range(1, M + 1):
        qn *= q
        term = coeffs[n - 1] * qn
        total += term
        mag += abs(term) * (n * weight + M + 8)
    rounding = up_mul(wmp, mag, wmp.ldexp(1, 1 - wmp.prec))
    center, drift = round_exact(mp, *total._mpc_)
    radius = up_add(mp, to_mpf(mp, tail), rounding, drift)
    return BallComplex(center, radius)


def cusp_constant(f: Newform, y0, ctx: PrecisionContext | None = None, start: int = 2):
    """Constant ``c`` with ``sum_{n >= start} |a_n| e^{-2 pi n y} <= c e^{-2 pi start y}`` for y >= y0.

    With ``start = 2`` this is the constant bounding ``|f(z) - e^{2 pi i z}|`` by
    ``c e^{-4 pi Im z}`` on ``Im z >= y0``.  Stored coefficients are used as is;
    the envelope covers the rest.
    """
    ctx = ctx or PrecisionContext(64)
    mp = ctx.mp
    y0 = to_mpf(mp, y0)
    if y0 <= 0:
        raise ValidationError("y0 must be positive", module="modforms")
    C, e = envelope(f)
    rate = 2 * mp.pi * y0
    total = mp.mpf(0)
    for n in range(start, len(f) + 1):
        term = abs(to_mpf(mp, f.coefficients[n - 1])) * mp.exp(-rate * (n - start))
        total += term
        if term < total * mp.ldexp(1, -mp.prec - 8) and n > start + 8:
            break
    else:
        n = len(f)
    # envelope tail beyond the stored (or truncated) range
    m = n + 1
    first = C * mp.mpf(m) ** e * mp.exp(-rate * (m - start))
    ratio = (mp.mpf(m + 1) / m) ** e * mp.exp(-rate)
    if ratio >= 1:
        raise ValidationError("y0 too small for a convergent envelope tail", module="modforms")
    tail = first / (1 - ratio)
    return up_mul(mp, up_add(mp, total, tail), 1 + mp.ldexp(1, 8 - mp.prec))
