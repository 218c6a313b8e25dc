import random
from math import fsum, gcd, isqrt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from degcert import arith
from degcert.errors import CapacityError, ParameterError


def simple_prime_sieve(limit):
    """Independent primality oracle: plain bytearray Eratosthenes."""
    sieve = bytearray([1]) * (limit + 1)
    sieve[0:2] = b"\x00\x00"
    for p in range(2, isqrt(limit) + 1):
        if sieve[p]:
            sieve[p * p :: p] = bytearray(len(range(p * p, limit + 1, p)))
    return sieve


def brute_factorize(d):
    """Trial-division oracle, independent of the library's code paths."""
    out = []
    p = 2
    while p * p <= d:
        e = 0
        while d % p == 0:
            d //= p
            e += 1
        if e:
            out.append((p, e))
        p += 1
    if d > 1:
        out.append((d, 1))
    return out


# --- spf table ---------------------------------------------------------------


def test_spf_small_table():
    t = arith.build_spf_table(10)
    assert list(t.spf[2:11]) == [2, 3, 2, 5, 2, 7, 2, 3, 2]


def test_spf_smallest_table():
    t = arith.build_spf_table(2)
    assert t.smallest_factor(2) == 2


def test_spf_against_independent_sieve():
    limit = 10**6
    t = arith.build_spf_table(limit)
    oracle = simple_prime_sieve(limit)
    n_primes_oracle = sum(oracle[2:])
    fixed_points = int(np.count_nonzero(t.spf[2:] == np.arange(2, limit + 1)))
    assert n_primes_oracle == fixed_points == 78498
    # spot-check actual spf values against trial division
    rng = random.Random(7)
    for _ in range(300):
        m = rng.randrange(2, limit + 1)
        assert t.smallest_factor(m) == brute_factorize(m)[0][0]


def test_spf_invariants_every_entry_small():
    t = arith.build_spf_table(500)
    for m in range(2, 501):
        p = t.smallest_factor(m)
        assert m % p == 0
        assert arith.is_prime(p)
        assert (p == m) == arith.is_prime(m)


def test_spf_capacity_errors():
    with pytest.raises(CapacityError):
        arith.build_spf_table(1)
    with pytest.raises(CapacityError):
        arith.build_spf_table(arith.SPF_LIMIT_MAX + 1)


def test_spf_table_is_frozen():
    t = arith.build_spf_table(100)
    with pytest.raises(ValueError):
        t.spf[10] = 1


# --- factorization -----------------------------------------------------------


def test_factorize_5005():
    fi = arith.factorize(5005)
    assert fi.factors == ((5, 1), (7, 1), (11, 1), (13, 1))
    assert fi.largest_prime_power == 13


def test_factorize_one():
    fi = arith.factorize(1)
    assert fi.factors == ()
    assert fi.largest_prime_power == 1


def test_factorize_720():
    fi = arith.factorize(720)
    assert fi.factors == ((2, 4), (3, 2), (5, 1))
    assert fi.largest_prime_power == 16


def test_factorize_table_and_direct_agree():
    t = arith.build_spf_table(5000)
    for d in range(1, 2001):
        assert arith.factorize(d, t).factors == arith.factorize(d).factors


def test_largest_prime_power_examples():
    assert arith.largest_prime_power(5005) == 13
    assert arith.largest_prime_power(1) == 1
    assert arith.largest_prime_power(53599) == 31


def test_factorize_random_invariants():
    # 10^4 random d <= 10^9: reconstruction plus largest-prime-power facts.
    rng = random.Random(12345)
    for _ in range(10**4):
        d = rng.randrange(1, 10**9 + 1)
        fi = arith.factorize(d)
        prod = 1
        last_p = 1
        for p, e in fi.factors:
            assert p > last_p and e >= 1
            prod *= p**e
            last_p = p
        assert prod == d
        q = fi.largest_prime_power
        assert d % q == 0
        if fi.factors:
            assert q == max(p**e for p, e in fi.factors)
            assert q in {p**e for p, e in fi.factors}
        else:
            assert q == 1


@settings(max_examples=150, deadline=None)
@given(st.integers(min_value=1, max_value=10**12))
def test_factorize_roundtrip_hypothesis(d):
    fi = arith.factorize(d)
    prod = 1
    for p, e in fi.factors:
        assert arith.is_prime(p)
        prod *= p**e
    assert prod == d


def test_factorize_exact_near_int64_boundary():
    # adversarial inputs near 2^63: everything must stay exact, never wrap
    p1, p2 = 2147483647, 4294967291  # both prime
    d = p1 * p2  # 9223372004559929477, just below 2^63
    fi = arith.factorize(d)
    assert fi.factors == ((p1, 1), (p2, 1))
    assert fi.largest_prime_power == p2
    fi2 = arith.factorize(2**62)
    assert fi2.factors == ((2, 62),)
    assert fi2.largest_prime_power == 2**62


def test_is_prime_against_oracle():
    oracle = simple_prime_sieve(10**4)
    for m in range(10**4 + 1):
        assert arith.is_prime(m) == bool(oracle[m])
    assert arith.is_prime(2**31 - 1)
    assert not arith.is_prime(2**31 + 1)


def test_prime_power_root():
    assert arith.prime_power_root(8) == (2, 3)
    assert arith.prime_power_root(13) == (13, 1)
    assert arith.prime_power_root(125) == (5, 3)
    assert arith.prime_power_root(36) is None
    assert arith.prime_power_root(1) is None
    assert arith.prime_power_root(2**62) == (2, 62)


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=0, max_value=10**18), st.integers(min_value=1, max_value=20))
def test_integer_nth_root(x, n):
    r = arith.integer_nth_root(x, n)
    assert r**n <= x
    assert (r + 1) ** n > x


# --- totient -----------------------------------------------------------------


def test_euler_phi_examples():
    assert arith.euler_phi(6) == 2
    assert arith.euler_phi(1) == 1
    assert arith.euler_phi(720) == 192


def test_euler_phi_brute():
    for m in range(1, 200):
        assert arith.euler_phi(m) == sum(1 for a in range(1, m + 1) if gcd(a, m) == 1)


# --- prime and prime power counting ------------------------------------------


def test_prime_count_known_values():
    for x, pi in [(10, 4), (100, 25), (1000, 168), (10**6, 78498)]:
        assert arith.prime_count(x) == pi
    assert arith.prime_count(1) == 0


def brute_prime_powers_upto(m, oracle):
    count = 0
    for p in range(2, m + 1):
        if oracle[p]:
            pe = p
            while pe <= m:
                count += 1
                pe *= p
    return count


def test_prime_power_count_small():
    assert arith.prime_power_count(10) == 7  # 2,3,4,5,7,8,9
    assert arith.prime_power_count(1) == 0


def test_prime_power_count_100_brute():
    oracle = simple_prime_sieve(100)
    assert arith.prime_power_count(100) == brute_prime_powers_upto(100, oracle) == 35


def test_prime_power_count_identity_exhaustive_small():
    # direct enumeration vs the sum-over-exponents formula
    limit = 2000
    oracle = simple_prime_sieve(limit)
    counts = np.zeros(limit + 1, dtype=int)
    for p in range(2, limit + 1):
        if oracle[p]:
            pe = p
            while pe <= limit:
                counts[pe] += 1
                pe *= p
    cum = np.cumsum(counts)
    for m in range(1, limit + 1):
        assert arith.prime_power_count(m) == cum[m]


def test_prime_power_count_identity_sampled_1e5():
    limit = 10**5
    oracle = simple_prime_sieve(limit)
    rng = random.Random(99)
    for m in [10**5] + [rng.randrange(2, limit) for _ in range(40)]:
        assert arith.prime_power_count(m) == brute_prime_powers_upto(m, oracle)


def test_prime_power_ratio_decreasing():
    ratios = [arith.prime_power_count(10**k) / 10**k for k in (3, 4, 5, 6)]
    assert all(a > b for a, b in zip(ratios, ratios[1:]))


# --- mertens sums ------------------------------------------------------------


def test_mertens_empty_range():
    r = arith.mertens_sum(10, 1)
    assert r.sum == 0.0
    assert r.prime_count == 0


def test_mertens_exact_root_boundary():
    # 8**(1/3) = 2 exactly: the lower limit is strict, so 2 is excluded
    r = arith.mertens_sum(8, 3)
    assert r.prime_count == 3  # 3, 5, 7
    assert r.sum == pytest.approx(fsum([1 / 3, 1 / 5, 1 / 7]), abs=1e-16)


def test_mertens_100_2_against_direct_oracle():
    oracle = simple_prime_sieve(100)
    primes = [p for p in range(11, 101) if oracle[p]]
    assert len(primes) == 21
    expected = fsum(1.0 / p for p in primes)
    r = arith.mertens_sum(100, 2)
    assert r.prime_count == 21
    assert r.sum == pytest.approx(expected, abs=1e-15)


def test_mertens_monotone_on_decades_n3():
    vals = [arith.mertens_sum(10**k, 3).sum for k in (3, 4, 5, 6)]
    assert all(a < b for a, b in zip(vals, vals[1:]))


def test_mertens_deterministic_across_threads():
    a = arith.mertens_sum(10**6, 3, threads=1)
    b = arith.mertens_sum(10**6, 3, threads=4)
    assert a.sum == b.sum and a.prime_count == b.prime_count


def test_mertens_validation():
    with pytest.raises(ParameterError):
        arith.mertens_sum(1, 1)
    with pytest.raises(ParameterError):
        arith.mertens_sum(100, 0)
    with pytest.raises(CapacityError):
        arith.mertens_sum(arith.SIEVE_BUDGET + 1, 3)


# --- segmented kernels --------------------------------------------------------


def brute_lpp(d):
    return max((p**e for p, e in brute_factorize(d)), default=1)


def test_largest_prime_power_segment_low():
    base = arith.primes_upto(100)
    q, lpf = arith.largest_prime_power_segment(1, 5000, base, want_prime_factor=True)
    for d in range(1, 5000):
        fs = brute_factorize(d)
        assert q[d - 1] == brute_lpp(d)
        assert lpf[d - 1] == (max(p for p, _ in fs) if fs else 1)


def test_largest_prime_power_segment_high_window():
    lo, hi = 10**7, 10**7 + 2048
    base = arith.primes_upto(isqrt(hi - 1))
    q, _ = arith.largest_prime_power_segment(lo, hi, base)
    for off in range(0, 2048, 97):
        assert q[off] == brute_lpp(lo + off)


def test_largest_prime_power_segment_rejects_zero_lo():
    base = arith.primes_upto(10)
    with pytest.raises(ParameterError):
        arith.largest_prime_power_segment(0, 10, base)


def test_coprime_mask_matches_gcd():
    from math import factorial

    for n in (1, 2, 3, 4, 6):
        mask = arith.coprime_mask(1, 2000, n)
        f = factorial(n)
        for d in range(1, 2000):
            assert mask[d - 1] == (gcd(d, f) == 1)
