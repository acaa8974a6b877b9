"""Frobenius traces of y^2 = x^3 + a x + b over F_p and the counts built on them.

a_p = -sum_x (x^3 + a x + b / p).  For many curves at one prime this is a
matrix product: with hist_a[v] = #{x : x^3 + a x = v} and the circulant
L[v, b] = ((v + b)/p), the block of traces is -hist @ L.
"""

from __future__ import annotations

import math
from collections import OrderedDict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .analytic import SatoTateWindow, b_cutoff
from .classnum import kronecker_H
from .errors import DomainError, IdentityError, ReductionError, ResourceCapError
from .ffield import is_prime, legendre_table, primes_upto

ENUMERATION_CAP = 300

__all__ = [
    "CurveModel",
    "TraceRecord",
    "SatoTateWindow",
    "IsoClassSet",
    "TraceTable",
    "TraceCache",
    "ap",
    "pi_r",
    "theta",
    "curve_traces",
    "enumerate_traces",
    "iso_classes",
    "trace_matrix",
    "window_mask",
]


@dataclass(frozen=True)
class CurveModel:
    a: int
    b: int

    @property
    def discriminant_factor(self) -> int:
        return 4 * self.a**3 + 27 * self.b**2

    @property
    def is_singular(self) -> bool:
        return self.discriminant_factor == 0

    @property
    def j_invariant(self) -> Fraction | None:
        if self.is_singular:
            return None
        return Fraction(1728 * 4 * self.a**3, self.discriminant_factor)

    def good_at(self, p: int) -> bool:
        return p > 3 and self.discriminant_factor % p != 0


@dataclass(frozen=True)
class TraceRecord:
    p: int
    a_p: int

    def __post_init__(self):
        if self.a_p * self.a_p > 4 * self.p:
            raise IdentityError(f"Hasse bound violated: a_p={self.a_p} at p={self.p}")

    @property
    def point_count(self) -> int:
        return self.p + 1 - self.a_p


def _check_prime(p: int) -> None:
    if p <= 3 or not is_prime(p):
        raise DomainError(f"need a prime p > 3, got {p}")


def _cubes(p: int) -> tuple[np.ndarray, np.ndarray]:
    x = np.arange(p, dtype=np.int64)
    return x, (x * x % p) * x % p


def _ap_single(p: int, a: int, b: int) -> int:
    x, x3 = _cubes(p)
    chi = legendre_table(p)
    return -int(chi[(x3 + (a % p) * x + (b % p)) % p].sum(dtype=np.int64))


def trace_block(p: int, a_res: np.ndarray, b_res: np.ndarray) -> np.ndarray:
    """Traces a_p(a, b) for residues a in a_res (rows) and b in b_res (columns).

    Singular pairs get whatever the character sum gives; callers mask them.
    """
    a_res = np.asarray(a_res, dtype=np.int64) % p
    b_res = np.asarray(b_res, dtype=np.int64) % p
    if len(a_res) * len(b_res) <= 2:
        return np.array([[_ap_single(p, int(a), int(b)) for b in b_res] for a in a_res], dtype=np.int64)
    x, x3 = _cubes(p)
    chi = legendre_table(p).astype(np.float64)
    hist = np.empty((len(a_res), p), dtype=np.float64)
    for i, a in enumerate(a_res):
        hist[i] = np.bincount((x3 + a * x) % p, minlength=p)
    circ = chi[(x[:, None] + b_res[None, :]) % p]
    return -np.rint(hist @ circ).astype(np.int64)


def singular_mask(p: int, a_res: np.ndarray, b_res: np.ndarray) -> np.ndarray:
    a_res = np.asarray(a_res, dtype=np.int64) % p
    b_res = np.asarray(b_res, dtype=np.int64) % p
    return ((4 * a_res[:, None] ** 3 % p + 27 * b_res[None, :] ** 2) % p) == 0


def ap(p: int, a: int, b: int) -> int:
    """Trace of Frobenius of E(a, b) at a prime p > 3 of good reduction."""
    _check_prime(p)
    if (4 * a**3 + 27 * b**2) % p == 0:
        raise ReductionError(f"E({a},{b}) has bad reduction at p={p}")
    t = _ap_single(p, a, b)
    TraceRecord(p, t)
    return t


def window_mask(traces: np.ndarray, primes: np.ndarray, alpha: float, beta: float) -> np.ndarray:
    """alpha <= a_p/(2 sqrt p) <= beta, both ends inclusive.

    Float comparison with an exact rational re-check of anything within 1e-9 of an edge.
    """
    traces = np.asarray(traces)
    primes = np.broadcast_to(np.asarray(primes), traces.shape)
    t = traces / (2.0 * np.sqrt(primes))
    mask = (t >= alpha) & (t <= beta)
    near = (np.abs(t - alpha) < 1e-9) | (np.abs(t - beta) < 1e-9)
    for idx in zip(*np.nonzero(near)):
        mask[idx] = _exact_in_window(int(traces[idx]), int(primes[idx]), alpha, beta)
    return mask


def _exact_ge(a: int, p: int, bound: float) -> bool:
    """a >= 2 * bound * sqrt(p), exactly."""
    q = Fraction(bound)
    if q <= 0 <= a:
        return True
    if a < 0 <= q:
        return False
    if a >= 0:
        return a * a >= 4 * q * q * p
    return a * a <= 4 * q * q * p


def _exact_in_window(a: int, p: int, alpha: float, beta: float) -> bool:
    return _exact_ge(a, p, alpha) and _exact_ge(-a, p, -beta)


# ---------------------------------------------------------------- cache


class TraceCache:
    """Transparent a_p memo keyed by (p, a mod p, b mod p).

    Entries are grouped per prime; when the byte budget is exceeded whole
    primes are evicted least-recently-used first.
    """

    ENTRY_BYTES = 96

    def __init__(self, max_bytes: int = 64 << 20):
        self.max_bytes = max_bytes
        self._store: OrderedDict[int, dict[tuple[int, int], int]] = OrderedDict()
        self._entries = 0
        self.hits = 0
        self.misses = 0
        self.evictions = 0

    @property
    def nbytes(self) -> int:
        return self._entries * self.ENTRY_BYTES

    def block(self, p: int, a_res: np.ndarray, b_res: np.ndarray) -> np.ndarray:
        a_res = [int(a) % p for a in a_res]
        b_res = [int(b) % p for b in b_res]
        entry = self._store.get(p)
        if entry is not None:
            self._store.move_to_end(p)
            try:
                out = np.array([[entry[a, b] for b in b_res] for a in a_res], dtype=np.int64)
            except KeyError:
                pass
            else:
                self.hits += out.size
                return out
        out = trace_block(p, np.array(a_res), np.array(b_res))
        self.misses += out.size
        self._insert(p, {(a, b): int(out[i, k]) for i, a in enumerate(a_res) for k, b in enumerate(b_res)})
        return out

    def _insert(self, p: int, values: dict[tuple[int, int], int]) -> None:
        entry = self._store.setdefault(p, {})
        before = len(entry)
        entry.update(values)
        self._entries += len(entry) - before
        self._store.move_to_end(p)
        while self.nbytes > self.max_bytes and self._store:
            _, dropped = self._store.popitem(last=False)
            self._entries -= len(dropped)
            self.evictions += 1

    def stats(self) -> dict[str, int]:
        return {"cache_hits": self.hits, "cache_misses": self.misses, "cache_evictions": self.evictions}


# ---------------------------------------------------------------- sweeps


def _prime_major_chunk(args) -> tuple[np.ndarray, np.ndarray]:
    a_vals, b_vals, primes = args
    traces = np.zeros((len(a_vals), len(primes)), dtype=np.int64)
    good = np.zeros((len(a_vals), len(primes)), dtype=bool)
    for k, p in enumerate(primes):
        t, g = _traces_at_prime(int(p), a_vals, b_vals, None)
        traces[:, k] = t
        good[:, k] = g
    return traces, good


def _traces_at_prime(p, a_vals, b_vals, cache):
    ua, ia = np.unique(a_vals % p, return_inverse=True)
    ub, ib = np.unique(b_vals % p, return_inverse=True)
    block = cache.block(p, ua, ub) if cache is not None else trace_block(p, ua, ub)
    bad = singular_mask(p, ua, ub)
    return block[ia, ib], ~bad[ia, ib]


def trace_matrix(
    curves,
    primes,
    *,
    cache: TraceCache | None = None,
    order: str = "prime",
    workers: int = 1,
    progress=None,
) -> tuple[np.ndarray, np.ndarray]:
    """Traces for every (curve, prime) pair.

    Returns ``(traces, good)``, both shaped (len(curves), len(primes));
    ``traces`` is zero where ``good`` is False.  Primes must exceed 3.
    The result does not depend on ``order``, ``workers`` or the cache.
    """
    a_vals = np.array([c.a for c in curves], dtype=np.int64)
    b_vals = np.array([c.b for c in curves], dtype=np.int64)
    primes = np.asarray(primes, dtype=np.int64)
    if len(primes) and primes.min() <= 3:
        raise DomainError("sweeps only cover primes p > 3")
    n, m = len(a_vals), len(primes)
    traces = np.zeros((n, m), dtype=np.int64)
    good = np.zeros((n, m), dtype=bool)
    if n == 0 or m == 0:
        return traces, good

    if order == "curve":
        for i in range(n):
            for k, p in enumerate(primes):
                p = int(p)
                if (4 * int(a_vals[i]) ** 3 + 27 * int(b_vals[i]) ** 2) % p == 0:
                    continue
                if cache is not None:
                    t = int(cache.block(p, [a_vals[i]], [b_vals[i]])[0, 0])
                else:
                    t = _ap_single(p, int(a_vals[i]), int(b_vals[i]))
                traces[i, k] = t
                good[i, k] = True
            if progress:
                progress(i + 1, n)
    elif order == "prime":
        if workers > 1:
            chunks = np.array_split(primes, workers * 4)
            with ProcessPoolExecutor(max_workers=workers) as pool:
                parts = list(pool.map(_prime_major_chunk, [(a_vals, b_vals, c) for c in chunks]))
            traces = np.concatenate([t for t, _ in parts], axis=1)
            good = np.concatenate([g for _, g in parts], axis=1)
        else:
            for k, p in enumerate(primes):
                t, g = _traces_at_prime(int(p), a_vals, b_vals, cache)
                traces[:, k] = t
                good[:, k] = g
                if progress and (k + 1) % 50 == 0:
                    progress(k + 1, m)
    else:
        raise DomainError(f"unknown sweep order {order!r}")

    traces[~good] = 0
    bad = np.abs(traces) ** 2 > 4 * primes[None, :]
    if bad.any():
        raise IdentityError("Hasse bound violated in sweep")
    return traces, good


def curve_traces(curve: CurveModel, x: float, cache: TraceCache | None = None) -> tuple[np.ndarray, np.ndarray]:
    """(primes, traces) over good-reduction primes 3 < p <= x, increasing p."""
    if curve.is_singular:
        raise DomainError(f"E({curve.a},{curve.b}) is singular")
    ps = primes_upto(x)
    ps = ps[ps > 3]
    traces, good = trace_matrix([curve], ps, cache=cache)
    return ps[good[0]], traces[0, good[0]]


def pi_r(curve: CurveModel, r: int, x: float, cutoff_mode: str = "all_good", cache=None) -> int:
    """Number of good primes p <= x (p > 3, or p > B(r)) with a_p = r."""
    if cutoff_mode not in ("all_good", "paper_Br"):
        raise DomainError(f"unknown cutoff mode {cutoff_mode!r}")
    ps, ts = curve_traces(curve, x, cache)
    keep = ts == r
    if cutoff_mode == "paper_Br":
        keep &= ps > b_cutoff(r)
    return int(keep.sum())


def theta(curve: CurveModel, window: SatoTateWindow, x: float, cache=None) -> float:
    """Sum of log p over good primes 3 < p <= x with a_p/(2 sqrt p) in the window."""
    ps, ts = curve_traces(curve, x, cache)
    sel = ps[window_mask(ts, ps, window.alpha, window.beta)]
    return math.fsum(math.log(int(p)) for p in sel)


# ---------------------------------------------------------------- full enumeration


@dataclass(frozen=True)
class TraceTable:
    """All traces over F_p: ``traces[a, b]`` is valid where ``good[a, b]``."""

    p: int
    traces: np.ndarray = field(repr=False)
    good: np.ndarray = field(repr=False)
    histogram: dict[int, int] = field(repr=False)

    @property
    def good_pairs(self) -> int:
        return int(self.good.sum())

    def as_dict(self) -> dict[tuple[int, int], int]:
        a_idx, b_idx = np.nonzero(self.good)
        return {(int(a), int(b)): int(self.traces[a, b]) for a, b in zip(a_idx, b_idx)}


def enumerate_traces(p: int, cap: int = ENUMERATION_CAP) -> TraceTable:
    _check_prime(p)
    if p > cap:
        raise ResourceCapError(f"full enumeration at p={p} exceeds cap {cap}")
    res = np.arange(p)
    traces = trace_block(p, res, res)
    good = ~singular_mask(p, res, res)
    traces[~good] = 0
    if (traces[good] ** 2 > 4 * p).any():
        raise IdentityError(f"Hasse bound violated at p={p}")
    vals, counts = np.unique(traces[good], return_counts=True)
    hist = {int(v): int(c) for v, c in zip(vals, counts)}
    return TraceTable(p, traces, good, hist)


@dataclass(frozen=True)
class IsoClassSet:
    """F_p-isomorphism classes of good E(u, v) with trace r; each class is an orbit of
    t.(u, v) = (t^4 u, t^6 v), represented by its lexicographically least pair."""

    p: int
    r: int
    representatives: tuple[tuple[int, int], ...]
    orbit_sizes: tuple[int, ...] = field(repr=False, default=())

    @property
    def restricted(self) -> tuple[tuple[int, int], ...]:
        return tuple((u, v) for u, v in self.representatives if u and v)

    @property
    def restricted_count(self) -> int:
        return len(self.restricted)


def iso_classes(p: int, r: int, cap: int = ENUMERATION_CAP) -> IsoClassSet:
    _check_prime(p)
    if r * r >= 4 * p:
        return IsoClassSet(p, r, ())
    table = enumerate_traces(p, cap)
    t = np.arange(1, p, dtype=np.int64)
    t2 = t * t % p
    t4 = t2 * t2 % p
    t6 = t4 * t2 % p
    members = np.argwhere(table.good & (table.traces == r))
    seen = set()
    reps, sizes = [], []
    for u, v in members:
        u, v = int(u), int(v)
        if (u, v) in seen:
            continue
        orbit = set(zip((t4 * u % p).tolist(), (t6 * v % p).tolist()))
        seen |= orbit
        reps.append(min(orbit))
        sizes.append(len(orbit))
    order = sorted(range(len(reps)), key=reps.__getitem__)
    out = IsoClassSet(p, r, tuple(reps[i] for i in order), tuple(sizes[i] for i in order))
    if out.restricted_count > kronecker_H(r, p):
        raise IdentityError(f"I_(r,p) exceeds H(r^2-4p) at p={p}, r={r}")
    return out
