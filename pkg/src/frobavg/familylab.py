"""Family averages over the box |a| <= A, |b| <= B and the character-sum decomposition of
#{|a| <= A, |b| <= B : p does not divide ab, a_p(E(a, b)) = r} for p = 1 mod 4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import sympy

from .analytic import (
    DEFAULT_CUTOFF,
    ExperimentConfig,
    SatoTateWindow,
    b_cutoff,
    lang_trotter_constant,
    pi_half,
)
from .classnum import kronecker_H
from .curvecount import CurveModel, TraceCache, enumerate_traces, iso_classes, trace_matrix, window_mask
from .errors import DomainError, IdentityError, ResourceCapError
from .ffield import character_table, is_prime, primes_upto


# j-invariants of the elliptic curves over Q with complex multiplication
CM_J_INVARIANTS = frozenset(
    {
        0,
        1728,
        -3375,
        8000,
        54000,
        287496,
        -32768,
        16581375,
        -884736,
        -12288000,
        -884736000,
        -147197952000,
        -262537412640768000,
    }
)

EXACT_DECOMPOSITION_CAP = 50


@dataclass(frozen=True)
class BrCutoff:
    r: int

    @property
    def value(self) -> float:
        return b_cutoff(self.r)


@dataclass(frozen=True)
class FamilyWindow:
    A: int
    B: int
    exclude_zero_ab: bool = False
    exclude_all_cm: bool = False

    def __post_init__(self):
        if self.A < 1 or self.B < 1:
            raise DomainError("A and B must be >= 1")

    @property
    def normalization(self) -> int:
        return 4 * self.A * self.B

    def members(self) -> tuple[list[CurveModel], int]:
        """Curves in the box after exclusions, plus the number of singular pairs skipped."""
        out, singular = [], 0
        for a in range(-self.A, self.A + 1):
            for b in range(-self.B, self.B + 1):
                c = CurveModel(a, b)
                if c.is_singular:
                    singular += 1
                    continue
                if self.exclude_zero_ab and a * b == 0:
                    continue
                if self.exclude_all_cm and is_cm(c):
                    continue
                out.append(c)
        return out, singular


@dataclass
class ExperimentReport:
    kind: str
    params: dict
    empirical: float
    predicted: float
    verdicts: dict[str, bool] = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    @property
    def ratio(self) -> float:
        return self.empirical / self.predicted if self.predicted else math.nan


def is_cm(curve: CurveModel) -> bool:
    j = curve.j_invariant
    return j is not None and j.denominator == 1 and int(j) in CM_J_INVARIANTS


def cm_scan(window: FamilyWindow) -> list[CurveModel]:
    """Nonsingular curves of the box with complex multiplication (axis families always included)."""
    out = []
    for a in range(-window.A, window.A + 1):
        for b in range(-window.B, window.B + 1):
            c = CurveModel(a, b)
            if not c.is_singular and (a * b == 0 or is_cm(c)):
                out.append(c)
    return out


def _check_work(n_curves: int, n_primes: int, max_work: int | None) -> None:
    if max_work is not None and n_curves * n_primes > max_work:
        raise ResourceCapError(f"{n_curves} curves x {n_primes} primes exceeds work cap {max_work}")


def _sweep_primes(x: float, lo: float = 3) -> np.ndarray:
    ps = primes_upto(x)
    return ps[ps > lo]


def _sweep(curves, primes, cache, order, workers, max_work, progress):
    _check_work(len(curves), len(primes), max_work)
    return trace_matrix(curves, primes, cache=cache, order=order, workers=workers, progress=progress)


def lt_average(
    window: FamilyWindow,
    r: int,
    x: float,
    *,
    cutoff_mode: str = "all_good",
    constant_cutoff: int = DEFAULT_CUTOFF,
    config: ExperimentConfig | None = None,
    cache: TraceCache | None = None,
    order: str = "prime",
    workers: int = 1,
    max_work: int | None = None,
    progress=None,
) -> ExperimentReport:
    """(1/4AB) sum over the box of pi^r_{E(a,b)}(x) against C_r pi_{1/2}(x)."""
    curves, singular = window.members()
    lo = b_cutoff(r) if cutoff_mode == "paper_Br" else 3
    primes = _sweep_primes(x, lo)
    traces, good = _sweep(curves, primes, cache, order, workers, max_work, progress)
    total = int((good & (traces == r)).sum())
    empirical = total / window.normalization
    const = lang_trotter_constant(r, constant_cutoff)
    predicted = const.value * pi_half(x) if x >= 2 else 0.0
    config = config or ExperimentConfig(window.A, window.B, x)
    report = ExperimentReport(
        "lt-average",
        {
            "A": window.A,
            "B": window.B,
            "r": r,
            "x": x,
            "exclude_zero_ab": window.exclude_zero_ab,
            "exclude_all_cm": window.exclude_all_cm,
            "cutoff_mode": cutoff_mode,
        },
        empirical,
        predicted,
        config.lt_conditions(),
        {
            "count": total,
            "curves": len(curves),
            "singular_skipped": singular,
            "primes": len(primes),
            "C_r": const.value,
            "C_r_tail_bound": const.tail_bound,
        },
    )
    if len(primes) == 0 or not curves:
        report.warnings.append("degenerate window: no curves or no primes in range")
    return report


def st_average(
    window: FamilyWindow,
    st: SatoTateWindow,
    x: float,
    *,
    config: ExperimentConfig | None = None,
    cache: TraceCache | None = None,
    order: str = "prime",
    workers: int = 1,
    max_work: int | None = None,
    progress=None,
) -> ExperimentReport:
    """(1/4AB) sum over 1 <= |a| <= A, 1 <= |b| <= B of Theta(alpha, beta; x) against x F(alpha, beta)."""
    if not window.exclude_zero_ab:
        window = FamilyWindow(window.A, window.B, True, window.exclude_all_cm)
    curves, singular = window.members()
    primes = _sweep_primes(x)
    traces, good = _sweep(curves, primes, cache, order, workers, max_work, progress)
    hit = good & window_mask(traces, primes, st.alpha, st.beta)
    logs = [math.log(int(p)) for p in primes]
    # per-curve sums in increasing p, then one correctly rounded combine
    per_curve = [math.fsum(logs[k] for k in np.flatnonzero(row)) for row in hit]
    empirical = math.fsum(per_curve) / window.normalization
    predicted = x * st.measure
    config = config or ExperimentConfig(window.A, window.B, x, exclude_zero_ab=True)
    report = ExperimentReport(
        "st-average",
        {
            "A": window.A,
            "B": window.B,
            "alpha": st.alpha,
            "beta": st.beta,
            "x": x,
            "exclude_all_cm": window.exclude_all_cm,
        },
        empirical,
        predicted,
        config.st_conditions(st),
        {
            "F": st.measure,
            "curves": len(curves),
            "singular_skipped": singular,
            "primes": len(primes),
            "hits": int(hit.sum()),
        },
    )
    if len(primes) == 0 or not curves:
        report.warnings.append("degenerate window: no curves or no primes in range")
    return report


def cm_family_contribution(A: int, B: int, x: float, *, cache: TraceCache | None = None) -> float:
    """(1/4AB) (sum_{1<=|a|<=A} pi^0_{E(a,0)}(x) + sum_{1<=|b|<=B} pi^0_{E(0,b)}(x))."""
    if A < 1 or B < 1:
        raise DomainError("A and B must be >= 1")
    curves = [CurveModel(a, 0) for a in range(-A, A + 1) if a] + [CurveModel(0, b) for b in range(-B, B + 1) if b]
    primes = _sweep_primes(x)
    traces, good = trace_matrix(curves, primes, cache=cache)
    return int((good & (traces == 0)).sum()) / (4 * A * B)


def cm_family_report(A: int, B: int, x: float, *, cache: TraceCache | None = None) -> ExperimentReport:
    value = cm_family_contribution(A, B, x, cache=cache)
    baseline = math.pi / 3 * pi_half(x) if x >= 2 else 0.0
    n_primes = len(primes_upto(x))
    return ExperimentReport(
        "cm-contribution",
        {"A": A, "B": B, "x": x},
        value,
        baseline,
        {"exceeds_pi/3*pi_half": value > baseline},
        {"deuring_scale": (1 / A + 1 / B) * n_primes, "pi_x": n_primes},
    )


# ---------------------------------------------------------------- Deuring count


@dataclass(frozen=True)
class DeuringRow:
    p: int
    r: int
    count: int
    H: Fraction

    @property
    def predicted(self) -> Fraction:
        return Fraction(self.p - 1, 2) * self.H

    @property
    def exact(self) -> bool:
        return self.count == self.predicted


def deuring_check(pmax: int, pmin: int = 5) -> list[DeuringRow]:
    """Trace histogram of all of F_p^2 against (p-1)/2 * H(4p - r^2), for 0 < |r| < 2 sqrt p."""
    rows = []
    for p in primes_upto(pmax):
        p = int(p)
        if p < max(pmin, 5):
            continue
        hist = enumerate_traces(p).histogram
        for r in range(-math.isqrt(4 * p - 1), math.isqrt(4 * p - 1) + 1):
            if r == 0 or r % p == 0:
                continue
            rows.append(DeuringRow(p, r, hist.get(r, 0), kronecker_H(r, p)))
    return rows


# ---------------------------------------------------------------- decomposition


@dataclass
class DecompositionResult:
    p: int
    r: int
    A: int
    B: int
    M_p: complex
    E1_p: complex
    E2_p: complex
    brute_count: int
    classes: int = 0
    exact: bool = False

    @property
    def total(self) -> complex:
        return self.M_p + self.E1_p + self.E2_p

    @property
    def tolerance(self) -> float:
        return 1e-6 * (self.p + self.A * self.B)

    @property
    def matches(self) -> bool:
        t = self.total
        return abs(t - self.brute_count) <= self.tolerance and abs(t.imag) <= self.tolerance


def brute_count(p: int, r: int, A: int, B: int) -> int:
    """#{|a| <= A, |b| <= B : p does not divide ab, E(a, b) good at p, a_p = r}."""
    table = enumerate_traces(p)
    a = np.array([a for a in range(-A, A + 1) if a % p], dtype=np.int64) % p
    b = np.array([b for b in range(-B, B + 1) if b % p], dtype=np.int64) % p
    sub_t = table.traces[np.ix_(a, b)]
    sub_g = table.good[np.ix_(a, b)]
    return int((sub_g & (sub_t == r)).sum())


def _log_histogram(table, bound: int) -> np.ndarray:
    n = np.array([n for n in range(-bound, bound + 1) if n % table.p], dtype=np.int64)
    return np.bincount(table.dlog[n % table.p], minlength=table.order)


def _classify(m: np.ndarray, s: np.ndarray) -> np.ndarray:
    """0 = main term, 1 = first error term, 2 = second error term."""
    return (m != 0).astype(int) + (s != 0).astype(int)


def decompose_count(
    p: int,
    r: int,
    A: int,
    B: int,
    *,
    representatives=None,
    exact: bool = False,
) -> DecompositionResult:
    """Evaluate the four-fold character sum for the count and split it into M, E1, E2.

    With chi_j(n) = zeta^(j dlog n), zeta = exp(2 pi i/(p-1)), and the quartic
    symbol equal to chi_{(p-1)/4}, the (k, j) term pairs the character
    chi_m, m = k(p-1)/4 + 3j, on a with chi_{-s}, s = 2j, on b.  The main
    term is m = s = 0, E2 has both nonzero, E1 the rest.
    """
    if p <= 3 or not is_prime(p) or p % 4 != 1:
        raise DomainError(f"decomposition needs a prime p = 1 mod 4, got {p}")
    if A < 1 or B < 1:
        raise DomainError("A and B must be >= 1")
    if representatives is None:
        representatives = iso_classes(p, r).restricted
    count = brute_count(p, r, A, B) if r * r < 4 * p else 0
    if not representatives:
        return DecompositionResult(p, r, A, B, 0j, 0j, 0j, count, 0, exact)

    table = character_table(p)
    N = table.order
    ha = _log_histogram(table, A)
    hb = _log_histogram(table, B)
    du = np.array([table.log(u) for u, _ in representatives], dtype=np.int64)
    dv = np.array([table.log(v) for _, v in representatives], dtype=np.int64)
    j = np.arange(N, dtype=np.int64)
    s = (2 * j) % N

    if exact:
        return _decompose_exact(p, r, A, B, N, ha, hb, du, dv, count, len(representatives))

    # hat_a[m] = sum_e ha[e] zeta^(m e); hat_b[s] = sum_e hb[e] zeta^(-s e)
    hat_a = np.fft.ifft(ha) * N
    hat_b = np.fft.fft(hb)
    pieces = [[], [], []]
    for k in range(1, 5):
        m = (k * (N // 4) + 3 * j) % N
        phase = (-np.outer(m, du) + np.outer(s, dv)) % N
        rep = np.exp(2j * np.pi * phase / N).sum(axis=1)
        terms = rep * hat_a[m] * hat_b[s] / (4 * N)
        cls = _classify(m, s)
        for c in range(3):
            pieces[c].extend(terms[cls == c].tolist())
    M_p, E1, E2 = (complex(math.fsum(t.real for t in ts), math.fsum(t.imag for t in ts)) for ts in pieces)
    return DecompositionResult(p, r, A, B, M_p, E1, E2, count, len(representatives), False)


def _cyclic_conv(u: np.ndarray, v: np.ndarray, N: int) -> np.ndarray:
    full = np.convolve(u, v)
    out = full[:N].copy()
    out[: len(full) - N] += full[N:]
    return out


def _exponent_vector(weights: np.ndarray, exps: np.ndarray, N: int) -> np.ndarray:
    return np.bincount(exps % N, weights=weights, minlength=N).astype(np.int64)


def reduce_cyclotomic(vec, N: int) -> list[int]:
    """Canonical coordinates of sum vec[e] zeta_N^e in the power basis of Q(zeta_N)."""
    phi = [int(c) for c in sympy.Poly(sympy.cyclotomic_poly(N, sympy.Symbol("z"))).all_coeffs()]
    deg = len(phi) - 1
    rem = [int(c) for c in vec]
    for top in range(len(rem) - 1, deg - 1, -1):
        c = rem[top]
        if c:
            for i, pc in enumerate(phi):
                rem[top - i] -= c * pc
    return rem[:deg] + [0] * max(0, deg - len(rem))


def _decompose_exact(p, r, A, B, N, ha, hb, du, dv, count, n_classes) -> DecompositionResult:
    if p > EXACT_DECOMPOSITION_CAP:
        raise ResourceCapError(f"exact decomposition is limited to p <= {EXACT_DECOMPOSITION_CAP}")
    e = np.arange(N, dtype=np.int64)
    ones = np.ones(len(du), dtype=np.int64)
    acc = [np.zeros(N, dtype=np.int64) for _ in range(3)]
    for k in range(1, 5):
        for j in range(N):
            m = (k * (N // 4) + 3 * j) % N
            s = (2 * j) % N
            va = _exponent_vector(ha, m * e, N)
            vb = _exponent_vector(hb, -s * e, N)
            vr = _exponent_vector(ones, -m * du + s * dv, N)
            acc[int(m != 0) + int(s != 0)] += _cyclic_conv(_cyclic_conv(vr, va, N), vb, N)
    total = reduce_cyclotomic(sum(acc), N)
    expected = [4 * N * count] + [0] * (len(total) - 1)
    if total != expected:
        raise IdentityError(f"exact decomposition mismatch at p={p}, r={r}, A={A}, B={B}")
    zeta = np.exp(2j * np.pi * np.arange(N) / N)
    vals = [complex((v * zeta).sum()) / (4 * N) for v in acc]
    return DecompositionResult(p, r, A, B, vals[0], vals[1], vals[2], count, n_classes, True)
