import math
import random

import pytest
from sympy import isprime, primerange

from heegner_aj.errors import ValidationError
from heegner_aj.isogeny import level_structure_from_t
from heegner_aj.primes import (
    index_pair_violations,
    index_stream,
    is_prime,
    primes_in_range,
    sweep_primes,
    theorem_q_search,
    theorem_residues,
    valid_qs,
)
from heegner_aj.quadfield import ImagQuadField

from oracles import inert_by_roots, recheck_pair


def test_is_prime_matches_sympy():
    for n in range(-3, 5000):
        assert is_prime(n) == isprime(n)
    rng = random.Random(5)
    for _ in range(300):
        n = rng.randrange(10**12, 10**18)
        assert is_prime(n) == isprime(n)
    # strong pseudoprimes to several small bases
    for n in (3215031751, 2152302898747, 3474749660383, 341550071728321):
        assert not is_prime(n)


def test_segmented_sieve():
    assert list(primes_in_range(0, 200)) == list(primerange(0, 201))
    assert list(primes_in_range(65530, 131080)) == list(primerange(65530, 131081))


def test_valid_qs_example(K11, ls11):
    assert valid_qs(K11, ls11, 5, 3, 220) == [41, 61, 101, 131, 151, 211]


def test_index_stream_rechecked(K11, ls11):
    avoid = 1 * 11 * 23
    pairs = list(index_stream(K11, ls11, 5, 1500))
    assert pairs
    for pr in pairs:
        assert recheck_pair(pr.p, pr.q, 11, 5, avoid)
    keys = [pr.key for pr in pairs]
    assert keys == sorted(keys) and len(set(keys)) == len(keys)
    assert pairs == list(index_stream(K11, ls11, 5, 1500))
    # nothing missed: brute force over all prime pairs
    brute = [
        (q, p) for q in primerange(3, 1501) for p in primerange(q + 1, 1501) if recheck_pair(p, q, 11, 5, avoid)
    ]
    assert keys == brute


def test_index_pair_exclusions(K11, ls11):
    assert any("p != 1 mod N" in v for v in index_pair_violations(K11, ls11, 5, 67, 41))  # 67 = 2 mod 5
    assert any("divides" in v for v in index_pair_violations(K11, ls11, 5, 61, 23))
    assert index_pair_violations(K11, ls11, 5, 61, 41) == []
    assert "q not inert" in index_pair_violations(K11, ls11, 5, 61, 31)


def test_theorem_q_search_ell13(K11, ls11):
    qs = theorem_q_search(K11, 5, 13, 3, ls11)
    assert len(qs) == 3
    for q in qs:
        assert isprime(q) and q % 5 == 1 and q % 13 == 12
        assert inert_by_roots(q, 11) and math.gcd(q, 11 * 23) == 1
        assert ((q + 1) // K11.u_K) % 13 == 0
    assert qs == sorted(qs)


def test_theorem_residues_crt_nonempty(K11):
    residues, mod = theorem_residues(K11, 5, 13)
    assert mod == 5 * 11 * 13 and residues
    squares = {y * y % 11 for y in range(1, 11)}
    for x in residues:
        # (-11 | x) = (x | 11), so inert classes are the non-squares mod 11
        assert x % 5 == 1 and x % 13 == 12 and x % 11 not in squares and x % 11 != 0


def test_theorem_q_search_rank_bound(K11):
    with pytest.raises(ValidationError):
        theorem_q_search(K11, 5, 13, 3, require_rank_bound=True)
    qs = theorem_q_search(K11, 5, 331, 2, require_rank_bound=True)
    assert all(q % 331 == 330 and q % 5 == 1 for q in qs)


def test_other_field_and_structure():
    K = ImagQuadField(19)
    ls = level_structure_from_t(2, 3, 5)
    avoid = abs(ls.c) * 19 * ls.norm_ctd(K)
    for pr in index_stream(K, ls, 5, 800):
        assert recheck_pair(pr.p, pr.q, 19, 5, avoid)


def test_sweep_primes(K11, ls11):
    ps = sweep_primes(K11, ls11, 5, 41, 10, 200, 10)
    assert len(ps) == 10 and ps == sorted(ps)
    assert 10 * 41 <= ps[0] and ps[-1] <= 200 * 41
    assert all(not index_pair_violations(K11, ls11, 5, p, 41) for p in ps)
    with pytest.raises(ValidationError):
        sweep_primes(K11, ls11, 5, 31, 10, 200, 10)
