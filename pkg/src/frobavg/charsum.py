"""Short-interval character sums sum_{|n| <= M} chi(n) and the exceptional-prime scan."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .ffield import CharacterTable, character_table, is_prime, primes_upto, root_of_unity


@dataclass(frozen=True)
class ScanConfig:
    x: float
    M: int
    eta: float

    def __post_init__(self):
        if self.M < 2:
            raise DomainError("M must be >= 2")
        if not 0 < self.eta <= 0.25:
            raise DomainError("eta must lie in (0, 1/4]")

    @property
    def threshold(self) -> float:
        return self.M ** (1 - self.eta)


@dataclass
class ScanReport:
    config: ScanConfig
    primes: list[int] = field(repr=False)
    max_sums: list[float] = field(repr=False)
    exceptional: list[int]

    @property
    def threshold(self) -> float:
        return self.config.threshold

    @property
    def count(self) -> int:
        return len(self.exceptional)

    @property
    def scanned(self) -> int:
        return len(self.primes)

    @property
    def fraction(self) -> float:
        return self.count / self.scanned if self.scanned else 0.0

    @property
    def reference(self) -> float:
        """x^(3/4 + 4 eta), the size of the exceptional set up to x^o(1)."""
        return self.config.x ** (0.75 + 4 * self.config.eta)

    @property
    def ratio(self) -> float:
        return self.count / self.reference


def _check(p: int, M: int) -> None:
    if p < 3 or not is_prime(p):
        raise DomainError(f"{p} is not an odd prime")
    if not 1 <= M < p:
        raise DomainError(f"need 1 <= M < p, got M={M}, p={p}")


def exponent_histogram(table: CharacterTable, M: int, sign: int = 1) -> np.ndarray:
    """h[e] = #{1 <= n <= M : dlog(sign * n) = e}."""
    n = np.arange(1, M + 1, dtype=np.int64)
    return np.bincount(table.dlog[(sign * n) % table.p], minlength=table.order)


def char_sum_interval(p: int, j: int, M: int) -> complex:
    """sum over 1 <= |n| <= M of chi_j(n), summed exactly by exponent buckets."""
    _check(p, M)
    table = character_table(p)
    if not 0 <= j < table.order:
        raise DomainError(f"character index {j} outside [0, {table.order - 1}]")
    N = table.order
    n = np.arange(1, M + 1, dtype=np.int64)
    logs = np.concatenate([table.dlog[n % p], table.dlog[(-n) % p]])
    buckets = np.bincount((j * logs) % N, minlength=N)
    return sum(int(c) * root_of_unity(e, N) for e, c in enumerate(buckets) if c)


def one_sided_sums(p: int, M: int) -> np.ndarray:
    """S[j] = sum_{n=1}^{M} chi_j(n) for every j, by one DFT of the exponent histogram."""
    table = character_table(p)
    h = exponent_histogram(table, M)
    return np.fft.ifft(h) * table.order


def max_char_sum(p: int, M: int) -> float:
    """max over non-principal chi of |sum_{|n| <= M} chi(n)|."""
    if M < 2:
        raise DomainError("M must be >= 2")
    _check(p, M)
    S = one_sided_sums(p, M)
    # 1 + chi_j(-1) = 1 + (-1)^j since -1 = g^((p-1)/2)
    j = np.arange(len(S))
    two_sided = np.abs(S) * (1 + (-1.0) ** j)
    return float(two_sided[1:].max()) if len(S) > 1 else 0.0


def polya_vinogradov_cap(p: int, M: int) -> float:
    return min(2.0 * M, 2.0 * math.sqrt(p) * math.log(p) + 2.0)


def exceptional_primes(config: ScanConfig, progress=None) -> ScanReport:
    """Primes M < p <= x at which some non-principal character sum exceeds M^(1-eta)."""
    ps = [int(p) for p in primes_upto(config.x) if p > config.M]
    maxima, bad = [], []
    thr = config.threshold
    for k, p in enumerate(ps):
        m = max_char_sum(p, config.M)
        maxima.append(m)
        if m > thr:
            bad.append(p)
        if progress and (k + 1) % 100 == 0:
            progress(k + 1, len(ps))
    return ScanReport(config, ps, maxima, bad)
