import math
from fractions import Fraction

import numpy as np
import pytest

from frobavg.analytic import SatoTateWindow
from frobavg.classnum import (
    FormClass,
    L_one_chi,
    analytic_H,
    class_number,
    class_number_table,
    hp_sum,
    hurwitz_class_number,
    hurwitz_table,
    kronecker_H,
    reduced_forms,
)
from frobavg.errors import DomainError
from frobavg.ffield import primes_upto

# regression value: max over 5 <= p <= 10^4 and |r| < 2 sqrt p of H(4p - r^2) / (sqrt p log^2 p)
H_GROWTH_CONSTANT = 0.34529996832731213


def reduce_form(a, b, c):
    """Gauss reduction of a positive definite form."""
    while True:
        if c < a:
            a, b, c = c, -b, a
        elif abs(b) > a:
            k = (a - b) // (2 * a)
            b, c = b + 2 * k * a, a * k * k + b * k + c
        else:
            if b < 0 and (a == c or -b == a):
                b = -b
            return a, b, c


def classes_by_reduction(d, bound=12):
    """Reduce every primitive form with small coefficients; collects the class set from below."""
    out = set()
    for a in range(1, bound):
        for b in range(-bound, bound + 1):
            if (b * b - d) % (4 * a):
                continue
            c = (b * b - d) // (4 * a)
            if math.gcd(math.gcd(a, b), c) == 1:
                out.add(reduce_form(a, b, c))
    return out


@pytest.mark.parametrize(
    "d,forms",
    [
        (-3, [(1, 1, 1)]),
        (-4, [(1, 0, 1)]),
        (-23, [(1, 1, 6), (2, 1, 3), (2, -1, 3)]),
    ],
)
def test_reduced_forms_examples(d, forms):
    assert reduced_forms(d) == [FormClass(*f) for f in forms]


@pytest.mark.parametrize("d", [-3, -4, -7, -8, -15, -20, -23, -47, -56, -71, -84, -104, -163])
def test_reduced_forms_agree_with_reduction_oracle(d):
    got = {(f.A, f.B, f.C) for f in reduced_forms(d)}
    assert all(FormClass(*f).is_reduced() for f in got)
    assert classes_by_reduction(d, bound=2 * int(math.sqrt(-d)) + 3) == got


@pytest.mark.parametrize("d,h", [(-3, 1), (-4, 1), (-23, 3), (-47, 5), (-71, 7), (-163, 1), (-20, 2), (-56, 4), (-16, 1), (-12, 1)])
def test_class_number_known_values(d, h):
    assert class_number(d).h == h


@pytest.mark.parametrize("d", [0, 5, -1, -2, -6])
def test_reduced_forms_domain(d):
    with pytest.raises(DomainError):
        reduced_forms(d)


def test_class_number_table_matches_enumeration():
    h = class_number_table(2000)
    for n in range(3, 2001):
        if n % 4 in (0, 3):
            assert h[n] == class_number(-n).h
        else:
            assert h[n] == 0


def test_hurwitz_table_matches_exact():
    six = hurwitz_table(1500)
    for n in range(3, 1501):
        if n % 4 in (0, 3):
            assert six[n] == 6 * hurwitz_class_number(n)


@pytest.mark.parametrize("r,p,expected", [(1, 5, Fraction(1)), (2, 5, Fraction(3, 2)), (4, 5, Fraction(1, 2)), (0, 5, Fraction(2))])
def test_kronecker_H_examples(r, p, expected):
    assert kronecker_H(r, p) == expected


def test_kronecker_H_domain():
    with pytest.raises(DomainError):
        kronecker_H(5, 5)
    with pytest.raises(DomainError):
        kronecker_H(1, 9)


@pytest.mark.parametrize("p", [int(p) for p in primes_upto(400) if p > 3])
def test_kronecker_H_exact_and_symmetric(p):
    for r in range(0, math.isqrt(4 * p - 1) + 1):
        H = kronecker_H(r, p)
        assert H > 0
        assert (6 * H).denominator == 1
        assert kronecker_H(-r, p) == H


def test_class_number_growth_constant_regression():
    six = hurwitz_table(4 * 10**4)
    K = 0.0
    for p in primes_upto(10**4):
        p = int(p)
        if p < 5:
            continue
        rmax = math.isqrt(4 * p - 1)
        rs = np.arange(-rmax, rmax + 1)
        K = max(K, six[4 * p - rs * rs].max() / 6 / (math.sqrt(p) * math.log(p) ** 2))
    print(f"growth constant K = {K:.12f}")
    assert K == pytest.approx(H_GROWTH_CONSTANT, rel=1e-12)


def test_L_one_chi_closed_forms():
    assert L_one_chi(-4) == pytest.approx(math.pi / 4, abs=1e-4)
    assert L_one_chi(-3) == pytest.approx(math.pi / (3 * math.sqrt(3)), abs=1e-4)
    assert L_one_chi(-19) == pytest.approx(math.pi / math.sqrt(19), abs=1e-4)


def test_L_one_chi_domain():
    with pytest.raises(DomainError):
        L_one_chi(-5)
    with pytest.raises(DomainError):
        L_one_chi(-4, terms=10)


@pytest.mark.parametrize("n", [3, 4, 16, 19, 20, 75, 100, 427, 999])
def test_class_number_formula(n):
    assert analytic_H(n) == pytest.approx(float(hurwitz_class_number(n)), abs=1e-2)


def test_hp_sum_examples():
    assert hp_sum(5, SatoTateWindow(0, 1)) == 6
    assert hp_sum(5, SatoTateWindow(0.99, 1)) == 0
    # r = -4..4: 1/2 + 1 + 3/2 + 1 + 2 + 1 + 3/2 + 1 + 1/2
    assert hp_sum(5, SatoTateWindow(-1, 1)) == 10
    with pytest.raises(DomainError):
        hp_sum(3, SatoTateWindow(0, 1))
