"""Class numbers of imaginary quadratic discriminants.

Everything is counted by enumerating reduced binary quadratic forms; the
L(1, chi_d) series is kept only as an independent numerical cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from sympy.functions.combinatorial.numbers import kronecker_symbol

from .analytic import SatoTateWindow
from .errors import DomainError
from .ffield import is_prime


@dataclass(frozen=True, order=True)
class FormClass:
    A: int
    B: int
    C: int

    @property
    def discriminant(self) -> int:
        return self.B * self.B - 4 * self.A * self.C

    def is_reduced(self) -> bool:
        A, B, C = self.A, self.B, self.C
        if not (A > 0 and abs(B) <= A <= C):
            return False
        return B >= 0 or (abs(B) != A and A != C)


@dataclass(frozen=True)
class ClassNumberResult:
    d: int
    h: int
    w: int


def _check_disc(d: int) -> None:
    if d >= 0 or d % 4 not in (0, 1):
        raise DomainError(f"{d} is not a negative discriminant")


def unit_count(d: int) -> int:
    return {-3: 6, -4: 4}.get(d, 2)


def reduced_forms(d: int) -> list[FormClass]:
    """Primitive reduced forms of discriminant d, ordered by (A, |B|, B descending)."""
    _check_disc(d)
    out = []
    A = 1
    while 3 * A * A <= -d:
        for B in range(-A + 1, A + 1):
            if (B - d) % 2:
                continue
            num = B * B - d
            if num % (4 * A):
                continue
            C = num // (4 * A)
            if C < A or (B < 0 and A == C):
                continue
            if math.gcd(math.gcd(A, B), C) == 1:
                out.append(FormClass(A, B, C))
        A += 1
    out.sort(key=lambda f: (f.A, abs(f.B), -f.B, f.C))
    return out


@lru_cache(maxsize=1 << 16)
def class_number(d: int) -> ClassNumberResult:
    return ClassNumberResult(d, len(reduced_forms(d)), unit_count(d))


def hurwitz_class_number(n: int) -> Fraction:
    """Hurwitz class number H(n) for n > 0, n = 0 or 3 mod 4: sum over D = -n = d f^2 of 2 h(d)/w(d)."""
    if n <= 0 or n % 4 not in (0, 3):
        raise DomainError(f"H(n) needs n > 0 with n = 0, 3 mod 4; got {n}")
    total = Fraction(0)
    f = 1
    while f * f <= n:
        if n % (f * f) == 0:
            d = -(n // (f * f))
            if d % 4 in (0, 1):
                cn = class_number(d)
                total += Fraction(2 * cn.h, cn.w)
        f += 1
    return total


def kronecker_H(r: int, p: int) -> Fraction:
    """H(r^2 - 4p): weighted count of all classes of discriminant r^2 - 4p."""
    if not is_prime(p):
        raise DomainError(f"{p} is not prime")
    if r * r >= 4 * p:
        raise DomainError(f"r^2 = {r * r} >= 4p = {4 * p}")
    return hurwitz_class_number(4 * p - r * r)


def class_number_table(nmax: int) -> np.ndarray:
    """h[n] = number of primitive reduced forms of discriminant -n, for 0 <= n <= nmax.

    One pass over all reduced forms with 4AC - B^2 <= nmax; entries for
    n not = 0, 3 mod 4 stay zero.
    """
    h = np.zeros(nmax + 1, dtype=np.int64)
    A = 1
    while 3 * A * A <= nmax:
        for B in range(-A + 1, A + 1):
            C = A
            while True:
                n = 4 * A * C - B * B
                if n > nmax:
                    break
                if not (B < 0 and A == C) and math.gcd(math.gcd(A, B), C) == 1:
                    h[n] += 1
                C += 1
        A += 1
    return h


def hurwitz_table(nmax: int) -> np.ndarray:
    """6*H(n) as integers for 0 <= n <= nmax (zero where undefined)."""
    h = class_number_table(nmax)
    six_h = np.zeros(nmax + 1, dtype=np.int64)
    weight = np.full(nmax + 1, 6, dtype=np.int64)  # 6 * 2/w
    weight[3] = 2
    weight[4] = 3
    for f in range(1, math.isqrt(nmax) + 1):
        base = np.arange(1, nmax // (f * f) + 1)
        six_h[base * f * f] += h[base] * weight[base]
    return six_h


# ---------------------------------------------------------------- L(1, chi_d)


@lru_cache(maxsize=1024)
def _kronecker_period(d: int) -> np.ndarray:
    m = abs(d)
    return np.array([kronecker_symbol(d, n) for n in range(1, m + 1)], dtype=np.float64)


@lru_cache(maxsize=4)
def _reciprocals(terms: int) -> np.ndarray:
    inv = 1.0 / np.arange(1, terms + 1, dtype=np.float64)
    inv.flags.writeable = False
    return inv


def L_one_chi(d: int, terms: int = 10**6) -> float:
    """Partial sum of sum_{n <= terms} (d/n)/n with the Kronecker symbol (d/n)."""
    _check_disc(d)
    if terms < 1000:
        raise DomainError("terms must be >= 1000")
    period = _kronecker_period(d)
    reps = -(-terms // len(period))
    vals = np.tile(period, reps)[:terms]
    return float(np.dot(vals, _reciprocals(terms)))


def analytic_H(n: int, terms: int = 10**6) -> float:
    """(1/pi) sum_{-n = d f^2} sqrt|d| L(1, chi_d), the analytic counterpart of H(n)."""
    total = []
    f = 1
    while f * f <= n:
        if n % (f * f) == 0:
            d = -(n // (f * f))
            if d % 4 in (0, 1):
                total.append(math.sqrt(-d) * L_one_chi(d, terms))
        f += 1
    return math.fsum(total) / math.pi


# ---------------------------------------------------------------- H_p


def trace_range(p: int, alpha: float, beta: float) -> range:
    """Integers r with 2 sqrt(p) alpha <= r <= 2 sqrt(p) beta and r^2 < 4p."""
    s = 2.0 * math.sqrt(p)
    lo, hi = math.ceil(s * alpha), math.floor(s * beta)
    rmax = math.isqrt(4 * p - 1)
    return range(max(lo, -rmax), min(hi, rmax) + 1)


def hp_sum(p: int, window: SatoTateWindow) -> Fraction:
    """H_p = sum of H(r^2 - 4p) over traces r in the scaled window."""
    if p <= 3:
        raise DomainError("hp_sum needs p > 3")
    return sum((kronecker_H(r, p) for r in trace_range(p, window.alpha, window.beta)), Fraction(0))
