import cmath
import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frobavg.charsum import (
    ScanConfig,
    char_sum_interval,
    exceptional_primes,
    max_char_sum,
    one_sided_sums,
    polya_vinogradov_cap,
)
from frobavg.errors import DomainError
from frobavg.ffield import character_table, primes_upto

# exhaustive scan baseline, fixed at first build
SCAN_3000_55_COUNT = 11
SCAN_3000_55_PRIMES = [2161, 2647, 2663, 2689, 2693, 2699, 2777, 2789, 2861, 2897, 2963]

ODD_PRIMES_200 = [int(p) for p in primes_upto(200) if p > 2]


def naive_sum(p, j, M):
    """Direct evaluation with a brute-force discrete log."""
    N = p - 1
    g = next(g for g in range(2, p) if len({pow(g, k, p) for k in range(N)}) == N) if p > 3 else 2
    dlog = {pow(g, k, p): k for k in range(N)}
    return sum(cmath.exp(2j * math.pi * j * dlog[n % p] / N) for n in range(-M, M + 1) if n % p)


def test_examples():
    assert char_sum_interval(5, 0, 2) == 4
    assert max_char_sum(5, 2) == pytest.approx(0, abs=1e-12)
    with pytest.raises(DomainError):
        char_sum_interval(5, 1, 5)
    with pytest.raises(DomainError):
        char_sum_interval(5, 4, 2)
    with pytest.raises(DomainError):
        char_sum_interval(9, 1, 2)


def test_p5_all_characters_vanish():
    # odd j: chi(-1) = -1 kills the two-sided sum; j = 2: 1 + (2/5) = 0
    for j in (1, 2, 3):
        assert abs(char_sum_interval(5, j, 2)) < 1e-12


@pytest.mark.parametrize("p", ODD_PRIMES_200)
def test_against_naive_oracle(p):
    rng = random.Random(p)
    for _ in range(4):
        M = rng.randrange(1, p)
        j = rng.randrange(p - 1)
        assert abs(char_sum_interval(p, j, M) - naive_sum(p, j, M)) < 1e-9
    if p > 3:
        M = rng.randrange(2, p)
        ref = max(abs(naive_sum(p, j, M)) for j in range(1, p - 1))
        assert max_char_sum(p, M) == pytest.approx(ref, abs=1e-9)


def test_reflection_identity_grid():
    rng = random.Random(1000)
    ps = [int(p) for p in primes_upto(3000) if p > 3]
    for _ in range(1000):
        p = rng.choice(ps)
        M = rng.randrange(1, p)
        j = rng.randrange(p - 1)
        one = one_sided_sums(p, M)[j]
        assert abs(char_sum_interval(p, j, M) - (1 + (-1) ** j) * one) < 1e-9


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(ODD_PRIMES_200), st.data())
def test_principal_and_interval_orthogonality(p, data):
    M = data.draw(st.integers(1, p - 1))
    assert char_sum_interval(p, 0, M) == 2 * M
    hits = sum(1 for n in range(-M, M + 1) if n % p == 1)
    total = sum(char_sum_interval(p, j, M) for j in range(p - 1))
    assert abs(total - (p - 1) * hits) < 1e-7


@settings(max_examples=100, deadline=None)
@given(st.sampled_from([p for p in ODD_PRIMES_200 if p > 3]), st.data())
def test_max_sum_bounds(p, data):
    M = data.draw(st.integers(2, p - 1))
    m = max_char_sum(p, M)
    assert 0 <= m <= 2 * M + 1e-9
    assert m <= polya_vinogradov_cap(p, M) + 1e-9


def test_scan_regression_and_polya_vinogradov():
    rep = exceptional_primes(ScanConfig(3000, 55, 1 / 20))
    print(f"exceptional primes: {rep.count}/{rep.scanned}, ratio to x^(3/4+4eta) = {rep.ratio:.6f}")
    assert rep.count == SCAN_3000_55_COUNT
    assert rep.exceptional == SCAN_3000_55_PRIMES
    assert rep.count <= len(primes_upto(3000))
    assert all(m <= polya_vinogradov_cap(p, 55) for p, m in zip(rep.primes, rep.max_sums))
    assert min(rep.primes) > 55


def test_scan_monotone_in_eta_and_deterministic():
    counts = [exceptional_primes(ScanConfig(1500, 40, eta)).count for eta in (0.25, 0.1, 0.05, 0.01)]
    assert counts == sorted(counts, reverse=True)
    a = exceptional_primes(ScanConfig(1500, 40, 0.05))
    b = exceptional_primes(ScanConfig(1500, 40, 0.05))
    assert a.exceptional == b.exceptional and np.array_equal(a.max_sums, b.max_sums)


@pytest.mark.parametrize("kw", [dict(x=100, M=1, eta=0.1), dict(x=100, M=10, eta=0), dict(x=100, M=10, eta=0.3)])
def test_scan_config_domain(kw):
    with pytest.raises(DomainError):
        ScanConfig(**kw)


def test_one_sided_matches_table():
    p, M = 101, 17
    t = character_table(p)
    S = one_sided_sums(p, M)
    for j in (1, 25, 50, 99):
        ref = sum(cmath.exp(2j * math.pi * j * int(t.dlog[n]) / (p - 1)) for n in range(1, M + 1))
        assert abs(S[j] - ref) < 1e-9
