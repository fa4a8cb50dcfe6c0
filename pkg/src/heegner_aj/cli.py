"""Command line front end: ``heegner-aj {aj,isog,sweep,primes,periods}``.

Errors are reported on stderr as ``E:<module>:<code>:<detail>``.  Exit codes:
2 unreadable or malformed input, 3 violated precondition, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path

from . import __version__
from .aj import aj_representative
from .asym import point_XY, sweep_row
from .errors import (
    HeegnerError,
    InsufficientCoefficients,
    NewformParseError,
    PrecisionExhausted,
    ToleranceNotMet,
    ValidationError,
)
from .isogeny import INF, enumerate_isogeny_classes, kernel_match, level_structure_from_t, p1, tau_pq_t, tau_q_beta, tau_t
from .modforms import cusp_constant, parse_newform
from .numerics import PrecisionContext
from .periods import j_functional
from .primes import index_stream, sweep_primes, theorem_q_search, valid_qs
from .quadfield import ImagQuadField, heegner_hypothesis

ENV_PREC = "HEEGNER_AJ_PREC"
DEFAULT_PREC = 128
MAX_DIGITS = 40

EXIT_INPUT, EXIT_PRECONDITION, EXIT_NUMERIC = 2, 3, 4


# ---------------------------------------------------------------------------
# formatting


def fmt_beta(beta) -> str:
    return "inf" if beta == INF else str(beta)


def fmt_rational(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _ceil_sig(mp, x, digits=2) -> str:
    """Decimal string ``>= x`` with ``digits`` significant digits."""
    if x == 0:
        return "0"
    e = int(mp.floor(mp.log10(x)))
    scale = mp.mpf(10) ** (e - digits + 1)
    m = int(mp.ceil(x / scale))
    if m >= 10**digits:
        m //= 10
        m += 1
        e += 1
    return f"{m}e{e - digits + 1}"


def fmt_ball_parts(mp, center, radius):
    """Format ``(re, im, radius)`` so each printed part lies within the printed radius."""
    parts = []
    extra = mp.mpf(0)
    for x in (center.real, center.imag):
        if x == 0:
            parts.append("0")
            continue
        e = int(mp.floor(mp.log10(abs(x))))
        if radius > 0:
            digits = e - int(mp.floor(mp.log10(radius / 4))) + 1
        else:
            digits = MAX_DIGITS
        digits = min(max(digits, 3), MAX_DIGITS)
        s = mp.nstr(x, digits, strip_zeros=False, min_fixed=-4, max_fixed=digits)
        extra = max(extra, abs(mp.mpf(s) - x))
        parts.append(s)
    return parts[0], parts[1], _ceil_sig(mp, radius + extra)


def fmt_real(mp, x, digits=12) -> str:
    return mp.nstr(x, digits, min_fixed=-4, max_fixed=digits) if x != 0 else "0"


def emit(rows, header, args, config, out, comments=()):
    """Write the '#' config line, then rows as CSV or an aligned table."""
    lines = [f"# heegner-aj {args.command} config={config_hash(config)} prec={args.prec} eps={args.eps or 'default'}"]
    if args.format == "csv":
        lines.append(",".join(header))
        lines += [",".join(r) for r in rows]
    else:
        widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(header)]
        lines.append("  ".join(h.rjust(w) for h, w in zip(header, widths)))
        lines += ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in rows]
    lines += [f"# {c}" for c in comments]
    out.write("\n".join(lines) + "\n")


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


# ---------------------------------------------------------------------------
# argument handling


def _pair(text: str):
    try:
        a, b = (int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'c,d', got {text!r}") from None
    return a, b


def _beta(text: str):
    if text.lower() in ("inf", "oo", "infinity", "∞"):
        return INF
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"beta must be an integer or 'inf', got {text!r}") from None


def _poly(text: str):
    try:
        return [int(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integer coefficients 'c0,c1,...', got {text!r}") from None


def _default_prec() -> int:
    raw = os.environ.get(ENV_PREC)
    if raw is None:
        return DEFAULT_PREC
    try:
        return int(raw)
    except ValueError:
        raise ValidationError(f"{ENV_PREC}={raw!r} is not an integer", module="cli") from None


def _add_globals(p: argparse.ArgumentParser, suppress: bool):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--prec", type=int, default=d(None), help=f"working precision in bits (default ${ENV_PREC} or {DEFAULT_PREC})")
    p.add_argument("--eps", default=d(None), help="target absolute error (default 2^(8-prec))")
    p.add_argument("--jobs", type=int, default=d(1), help="worker threads for sweeps")
    p.add_argument("--out", default=d(None), help="output file (default stdout)")
    p.add_argument("--format", choices=("csv", "table"), default=d("csv"))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="heegner-aj", description="Abel-Jacobi images of explicit Heegner cycles.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _add_globals(ap, suppress=False)
    sub = ap.add_subparsers(dest="command", required=True)

    def field_args(p, newform=False):
        p.add_argument("--dK", type=int, required=True, help="field discriminant is -dK")
        p.add_argument("--ls", type=_pair, default=(1, 1), help="level structure t = (c tau + d)/N as 'c,d'")
        if newform:
            p.add_argument("--newform", required=True, help="newform JSON file")
        else:
            p.add_argument("--N", type=int, default=5, help="level")

    p = sub.add_parser("aj", help="Abel-Jacobi representative at one CM point")
    _add_globals(p, suppress=True)
    field_args(p, newform=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--p", type=int, default=None, help="second prime; omit for the q-isogeny point")
    p.add_argument("--beta", type=_beta, default=INF)

    p = sub.add_parser("isog", help="CM points tau_{q,beta} with conductors")
    _add_globals(p, suppress=True)
    field_args(p)
    p.add_argument("--q", type=int, required=True)

    p = sub.add_parser("sweep", help="compare AJ with its leading term over a range of p")
    _add_globals(p, suppress=True)
    field_args(p, newform=True)
    p.add_argument("--q", type=int, default=None, help="inert prime (default: least valid)")
    p.add_argument("--beta", type=_beta, default=0)
    p.add_argument("--gamma-min", type=Fraction, default=Fraction(10))
    p.add_argument("--gamma-max", type=Fraction, default=Fraction(200))
    p.add_argument("--count", type=int, default=10)

    p = sub.add_parser("primes", help="index pairs 'p q', or primes q for a given ell")
    _add_globals(p, suppress=True)
    field_args(p)
    p.add_argument("--limit", type=int, default=200)
    p.add_argument("--ell", type=int, default=None)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--strict", action="store_true", help="require ell > 6 N dK")

    p = sub.add_parser("periods", help="period functional J_{0,i oo,P}")
    _add_globals(p, suppress=True)
    p.add_argument("--newform", required=True)
    p.add_argument("--poly", type=_poly, required=True, help="coefficients 'c0,c1,...' of P")
    return ap


def _context(args) -> PrecisionContext:
    return PrecisionContext(args.prec, args.eps)


def _config(args, newform_path=None) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("out", "jobs", "newform")}
    cfg["ls"] = list(cfg["ls"]) if "ls" in cfg else None
    if newform_path is not None:
        cfg["newform_sha256"] = hashlib.sha256(Path(newform_path).read_bytes()).hexdigest()
    return cfg


def _field_ls(args, N):
    field = ImagQuadField(args.dK)
    if not heegner_hypothesis(args.dK, N):
        raise ValidationError(f"Heegner hypothesis fails for dK={args.dK}, N={N}", module="quadfield")
    c, d = args.ls
    return field, level_structure_from_t(c, d, N)


# ---------------------------------------------------------------------------
# subcommands


def cmd_aj(args, out) -> int:
    f = parse_newform(args.newform)
    field, ls = _field_ls(args, f.level)
    ctx = _context(args)
    if args.p is None:
        point = tau_t(field, ls, args.q, args.beta)
    else:
        point = tau_pq_t(field, ls, args.p, args.q, args.beta)
    res = aj_representative(f, point, ctx)
    mp = ctx.mp
    re, im, rad = fmt_ball_parts(mp, res.representative.center, res.representative.radius)
    row = [f.label, str(args.p or ""), str(args.q), fmt_beta(point.beta), str(res.r), re, im, rad,
           fmt_real(mp, abs(res.representative.center), 20)]
    ire, iim, irad = fmt_ball_parts(mp, res.integral.center, res.integral.radius)
    comments = [
        f"tau' = {fmt_rational(point.value.u)} + {fmt_rational(point.value.v)}*sqrt(-{field.d_K})",
        f"degree = {point.degree}  conductor = {point.conductor}  m_kk = {res.m}",
        f"constant = {res.constant}",
        f"integral = ({ire}) + ({iim})i +/- {irad}",
    ]
    emit([row], ["label", "p", "q", "beta", "r", "Re", "Im", "radius", "|value|"], args,
         _config(args, args.newform), out, comments)
    return 0


def cmd_isog(args, out) -> int:
    field, ls = _field_ls(args, args.N)
    census = enumerate_isogeny_classes(field, args.q)
    rows = []
    for beta, cond in census.rows:
        pt = tau_q_beta(field, args.q, beta)
        match = kernel_match(ls, args.q, beta) if ls.c % args.q else None
        rows.append([str(args.q), fmt_beta(beta), str(cond), "" if match is None else fmt_beta(match),
                     fmt_rational(pt.value.u), fmt_rational(pt.value.v)])
    comments = [
        f"{census.splitting}: {census.raw_count} points, {census.maximal_count} of conductor 1, "
        f"{census.conductor_q_count} of conductor {args.q}, class count {census.class_count}"
    ]
    emit(rows, ["q", "beta", "conductor", "beta'", "u", "v"], args, _config(args), out, comments)
    return 0


def cmd_sweep(args, out) -> int:
    f = parse_newform(args.newform)
    field, ls = _field_ls(args, f.level)
    ctx = _context(args)
    N = f.level
    q = args.q
    if q is None:
        qs = valid_qs(field, ls, N, 3, 10**5)
        if not qs:
            raise ValidationError("no valid inert prime q below 1e5", module="primes")
        q = qs[0]
    finite = args.beta != INF
    ps = sweep_primes(field, ls, N, q, args.gamma_min, args.gamma_max, args.count, finite)
    if not ps:
        raise ValidationError("no valid p in the requested gamma range", module="primes")
    _, y0 = point_XY(field, ls, ps[0], q, args.beta, ctx.mp)
    c = cusp_constant(f, y0)

    def work(p):
        return sweep_row(f, field, ls, p, q, args.beta, c, ctx)

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(work, ps))
    else:
        results = [work(p) for p in ps]
    mp = ctx.mp
    rows = []
    for p, res in zip(ps, results):
        d = res.datum
        rows.append([str(p), str(q), fmt_beta(d.beta), fmt_rational(d.gamma), str(d.kappa), fmt_rational(d.X),
                     fmt_real(mp, d.Y, 20), fmt_real(mp, d.I.center.real, 15), fmt_real(mp, d.J_abs.center.real, 15),
                     fmt_real(mp, res.aj_abs, 15), fmt_real(mp, res.rel_err, 8), fmt_real(mp, res.bound, 8)])
    ok = sum(r.within_bound for r in results)
    comments = [f"c = {fmt_real(mp, c, 10)} at y0 = {fmt_real(mp, y0, 10)}",
                f"rows within bound: {ok}/{len(results)}"]
    emit(rows, ["p", "q", "beta", "gamma", "kappa", "X", "Y", "I", "|J|", "|AJ|", "rel_err", "bound"], args,
         _config(args, args.newform), out, comments)
    return 0


def cmd_primes(args, out) -> int:
    field, ls = _field_ls(args, args.N)
    head = f"# heegner-aj primes config={config_hash(_config(args))}"
    if args.ell is not None:
        qs = theorem_q_search(field, args.N, args.ell, args.count, ls, require_rank_bound=args.strict)
        out.write(head + "\n" + "".join(f"{q}\n" for q in qs))
    else:
        out.write(head + "\n" + "".join(f"{pr.p} {pr.q}\n" for pr in index_stream(field, ls, args.N, args.limit)))
    return 0


def cmd_periods(args, out) -> int:
    f = parse_newform(args.newform)
    ctx = _context(args)
    res = j_functional(f, args.poly, ctx)
    re, im, rad = fmt_ball_parts(ctx.mp, res.value.center, res.value.radius)
    poly = ";".join(str(c) for c in args.poly)
    emit([[f.label, poly, re, im, rad]], ["label", "poly", "Re", "Im", "radius"], args,
         _config(args, args.newform), out)
    return 0


COMMANDS = {"aj": cmd_aj, "isog": cmd_isog, "sweep": cmd_sweep, "primes": cmd_primes, "periods": cmd_periods}


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, NewformParseError):
        return EXIT_INPUT
    if isinstance(exc, (PrecisionExhausted, ToleranceNotMet, InsufficientCoefficients)):
        return EXIT_NUMERIC
    if isinstance(exc, ValidationError):
        return EXIT_PRECONDITION
    return EXIT_NUMERIC


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.prec is None:
            args.prec = _default_prec()
        if args.jobs < 1:
            raise ValidationError("--jobs must be at least 1", module="cli")
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
                return COMMANDS[args.command](args, fh)
        return COMMANDS[args.command](args, sys.stdout)
    except HeegnerError as exc:
        detail = str(exc.detail).replace("\n", " ")
        print(f"E:{exc.module}:{exc.code}:{detail}", file=sys.stderr)
        return _exit_code(exc)
    except ArithmeticError as exc:
        print(f"E:core:arithmetic:{exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"E:cli:io:{exc}", file=sys.stderr)
        return EXIT_INPUT
