"""Regenerate tests/data/5.4.a.a.json from the eta product eta(z)^4 eta(5z)^4.

The unique newform of weight 4 on Gamma0(5).  Run from the repository root::

    python tools/make_eta_fixture.py [--terms 2000]
"""

import argparse
import json
from math import gcd
from pathlib import Path


def eta_power(e: int, scale: int, M: int) -> list:
    """Coefficients of prod_n (1 - q^(scale*n))^e up to q^M."""
    c = [0] * (M + 1)
    c[0] = 1
    for n in range(1, M // scale + 1):
        s = n * scale
        for _ in range(e):
            for i in range(M, s - 1, -1):
                c[i] -= c[i - s]
    return c


def coefficients(M: int) -> list:
    A = eta_power(4, 1, M)
    B = eta_power(4, 5, M)
    prod = [0] * (M + 1)
    for i, x in enumerate(A):
        if x:
            for j in range(0, M + 1 - i, 5):
                if B[j]:
                    prod[i + j] += x * B[j]
    # eta^4(z) eta^4(5z) = q * prod
    return prod[:M]


def check_hecke(a: list):
    """Multiplicativity and the prime-power recursion (character trivial, weight 4)."""
    M = len(a)
    at = lambda n: a[n - 1]
    for m in range(2, 60):
        for n in range(2, 60):
            if gcd(m, n) == 1 and m * n <= M:
                assert at(m * n) == at(m) * at(n), (m, n)
    for p in (2, 3, 7, 11, 13):
        e = 2
        while p**e <= M:
            assert at(p**e) == at(p) * at(p ** (e - 1)) - p**3 * at(p ** (e - 2))
            e += 1


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--terms", type=int, default=2000)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "tests/data/5.4.a.a.json"))
    args = ap.parse_args()
    a = coefficients(args.terms)
    check_hecke(a)
    doc = {"level": 5, "weight": 4, "label": "5.4.a.a", "fricke": 1, "coefficients": a}
    Path(args.out).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")
    print(f"wrote {len(a)} coefficients to {args.out}")


if __name__ == "__main__":
    main()
