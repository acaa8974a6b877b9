"""Prime generation and arithmetic over F_p.

Residue symbols, least primitive roots, discrete-log tables and the
multiplicative characters chi_j(n) = exp(2*pi*i*j*dlog(n)/(p-1)).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DomainError, EmptyRangeError, ResourceCapError

CHARACTER_TABLE_CAP = 1 << 20
SEGMENT_SIZE = 1 << 18


def _small_sieve(limit: int) -> np.ndarray:
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    for q in range(2, math.isqrt(limit) + 1):
        if is_prime[q]:
            is_prime[q * q :: q] = False
    return np.flatnonzero(is_prime)


@dataclass(frozen=True)
class PrimeSet:
    """All primes <= limit, strictly increasing."""

    limit: int
    primes: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.primes)

    def __iter__(self):
        return (int(p) for p in self.primes)

    def __contains__(self, n) -> bool:
        i = np.searchsorted(self.primes, n)
        return bool(i < len(self.primes) and self.primes[i] == n)

    def count(self, x: float) -> int:
        """pi(x) for x <= limit."""
        if x > self.limit:
            raise DomainError(f"x={x} exceeds sieve limit {self.limit}")
        return int(np.searchsorted(self.primes, math.floor(x), side="right"))

    def between(self, lo: float, hi: float) -> np.ndarray:
        """Primes p with lo < p <= hi."""
        i = np.searchsorted(self.primes, math.floor(lo), side="right")
        j = np.searchsorted(self.primes, math.floor(hi), side="right")
        return self.primes[i:j]


def sieve_primes(limit: int) -> PrimeSet:
    """Segmented sieve of Eratosthenes over [2, limit]."""
    limit = int(limit)
    if limit < 2:
        raise EmptyRangeError(f"no primes <= {limit}")
    base = _small_sieve(math.isqrt(limit))
    chunks = [base]
    lo = int(base[-1]) + 1 if len(base) else 2
    while lo <= limit:
        hi = min(lo + SEGMENT_SIZE, limit + 1)
        mark = np.ones(hi - lo, dtype=bool)
        for q in base:
            q = int(q)
            if q * q >= hi:
                break
            start = max(q * q, -(-lo // q) * q)
            mark[start - lo :: q] = False
        chunks.append(np.flatnonzero(mark) + lo)
        lo = hi
    primes = np.concatenate(chunks).astype(np.int64)
    primes.flags.writeable = False
    return PrimeSet(limit, primes)


@lru_cache(maxsize=8)
def _cached_sieve(limit: int) -> PrimeSet:
    return sieve_primes(limit)


def primes_upto(x: float) -> np.ndarray:
    """Convenience: array of primes <= x (empty if x < 2)."""
    n = math.floor(x)
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    # round the limit up so nearby queries share one sieve
    limit = max(1024, 1 << (n - 1).bit_length())
    ps = _cached_sieve(limit)
    return ps.primes[: np.searchsorted(ps.primes, n, side="right")]


def is_prime(n: int) -> bool:
    """Deterministic trial division."""
    if n < 2:
        return False
    for q in (2, 3):
        if n % q == 0:
            return n == q
    q = 5
    while q * q <= n:
        if n % q == 0 or n % (q + 2) == 0:
            return False
        q += 6
    return True


def _require_odd_prime(p: int) -> None:
    if p <= 2 or not is_prime(p):
        raise DomainError(f"{p} is not an odd prime")


def prime_factors(n: int) -> list[int]:
    out = []
    q = 2
    while q * q <= n:
        if n % q == 0:
            out.append(q)
            while n % q == 0:
                n //= q
        q += 1
    if n > 1:
        out.append(n)
    return out


def legendre(a: int, p: int) -> int:
    a, p = int(a), int(p)
    _require_odd_prime(p)
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


@lru_cache(maxsize=64)
def legendre_table(p: int) -> np.ndarray:
    """chi[n] = (n/p) for n in [0, p), built by marking squares once."""
    chi = np.full(p, -1, dtype=np.int8)
    x = np.arange(1, (p + 1) // 2, dtype=np.int64)
    chi[(x * x) % p] = 1
    chi[0] = 0
    chi.flags.writeable = False
    return chi


@lru_cache(maxsize=4096)
def least_primitive_root(p: int) -> int:
    if p == 2:
        return 1
    qs = prime_factors(p - 1)
    for g in range(2, p):
        if all(pow(g, (p - 1) // q, p) != 1 for q in qs):
            return g
    raise AssertionError("unreachable for prime p")


def quartic_symbol(a: int, p: int) -> int:
    """Exponent k in {0,1,2,3} with a^((p-1)/4) = iota^k, iota = g^((p-1)/4)."""
    if p % 4 != 1 or not is_prime(p):
        raise DomainError(f"quartic symbol needs a prime p = 1 mod 4, got {p}")
    if a % p == 0:
        raise DomainError(f"p={p} divides a={a}")
    iota = pow(least_primitive_root(p), (p - 1) // 4, p)
    val = pow(a, (p - 1) // 4, p)
    power = 1
    for k in range(4):
        if power == val:
            return k
        power = power * iota % p
    raise AssertionError("a^((p-1)/4) is always a fourth root of unity")


def root_of_unity(e: int, n: int) -> complex:
    """exp(2*pi*i*e/n), exact at multiples of a quarter turn."""
    e %= n
    if (4 * e) % n == 0:
        return (1, 1j, -1, -1j)[4 * e // n]
    return cmath.exp(2j * math.pi * e / n)


@dataclass(frozen=True)
class CharacterTable:
    """Discrete logs to the least primitive root g of p.

    ``dlog[n]`` is the exponent of n for 1 <= n < p; ``dlog[0]`` is -1.
    ``power[e]`` is g^e mod p.
    """

    p: int
    g: int
    dlog: np.ndarray = field(repr=False)
    power: np.ndarray = field(repr=False)

    @property
    def order(self) -> int:
        return self.p - 1

    def log(self, n: int) -> int:
        n %= self.p
        if n == 0:
            raise DomainError(f"p={self.p} divides n")
        return int(self.dlog[n])

    def exponent(self, j: int, n: int) -> int | None:
        """chi_j(n) as an exponent e with chi_j(n) = zeta^e, zeta = exp(2 pi i/(p-1)); None when p | n."""
        n %= self.p
        if n == 0:
            return None
        return (j * int(self.dlog[n])) % self.order


def build_character_table(p: int, cap: int = CHARACTER_TABLE_CAP) -> CharacterTable:
    if p < 3 or not is_prime(p):
        raise DomainError(f"{p} is not a prime >= 3")
    if p > cap:
        raise ResourceCapError(f"p={p} exceeds character table cap {cap}")
    g = least_primitive_root(p)
    power = np.empty(p - 1, dtype=np.int64)
    acc = 1
    for e in range(p - 1):
        power[e] = acc
        acc = acc * g % p
    dlog = np.full(p, -1, dtype=np.int64)
    dlog[power] = np.arange(p - 1)
    power.flags.writeable = False
    dlog.flags.writeable = False
    return CharacterTable(p, g, dlog, power)


@lru_cache(maxsize=256)
def character_table(p: int) -> CharacterTable:
    """Memoized build_character_table with the default cap."""
    return build_character_table(p)


def character_value(table: CharacterTable, j: int, n: int) -> complex:
    if not 0 <= j < table.order:
        raise DomainError(f"character index {j} outside [0, {table.order - 1}]")
    e = table.exponent(j, n)
    if e is None:
        return 0
    return root_of_unity(e, table.order)


def count_primes(x: float) -> int:
    return len(primes_upto(x))

