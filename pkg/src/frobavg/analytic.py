"""Analytic predictions: Lang-Trotter constant C_r, pi_{1/2}(x), Sato-Tate measure F(alpha, beta)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .ffield import primes_upto

DEFAULT_CUTOFF = 10**6


def adaptive_simpson(f, a: float, b: float, tol: float = 1e-10, max_depth: int = 60) -> float:
    """Adaptive Simpson quadrature with bisection to absolute tolerance ``tol``."""
    if a == b:
        return 0.0

    def simpson(fa, fm, fb, h):
        return h / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, m - a)
        right = simpson(fm, frm, fb, b - m)
        delta = left + right - whole
        if depth <= 0 or abs(delta) <= 15.0 * tol:
            return left + right + delta / 15.0
        return recurse(a, m, fa, flm, fm, left, tol / 2, depth - 1) + recurse(
            m, b, fm, frm, fb, right, tol / 2, depth - 1
        )

    fa, fb, fm = f(a), f(b), f(0.5 * (a + b))
    return recurse(a, b, fa, fm, fb, simpson(fa, fm, fb, b - a), tol, max_depth)


# ---------------------------------------------------------------- C_r


@dataclass(frozen=True)
class LangTrotterConstant:
    r: int
    cutoff: int
    value: float
    tail_bound: float
    closed_form: float | None = None


def local_factor(p: int, r: int) -> float:
    """Euler factor of C_r at the prime p."""
    if r % p == 0:
        return 1.0 / (1.0 - 1.0 / (p * p))
    return p * (p * p - p - 1) / ((p - 1) * (p * p - 1))


def lang_trotter_constant(r: int, cutoff: int = DEFAULT_CUTOFF) -> LangTrotterConstant:
    """Truncated Euler product for C_r over primes <= cutoff.

    Every factor is 1 + O(p^-2) with |log factor| <= 2/p^2, so the omitted
    tail satisfies |log tail| <= sum_{n > P} 2/n^2 <= 2/(P-1).
    ``tail_bound`` bounds |C_r - value| accordingly.
    """
    if cutoff < 100:
        raise DomainError("cutoff must be >= 100")
    ps = primes_upto(cutoff).astype(np.float64)
    divides = np.array([r % int(p) == 0 for p in ps]) if r != 0 else np.ones(len(ps), dtype=bool)
    log_div = -np.log1p(-1.0 / ps**2)
    # p(p^2-p-1)/((p-1)(p^2-1)) = 1 - 1/(p^3 - p^2 - p + 1)
    log_gen = np.log1p(-1.0 / (ps**3 - ps**2 - ps + 1.0))
    log_sum = math.fsum(np.where(divides, log_div, log_gen))
    value = 2.0 / math.pi * math.exp(log_sum)
    tail_log = 2.0 / (cutoff - 1)
    tail_bound = value * math.expm1(tail_log)
    closed = math.pi / 3 if r == 0 else None
    return LangTrotterConstant(r, cutoff, value, tail_bound, closed)


def b_cutoff(r: int) -> float:
    """B(r) = max{3, r, r^2/4}: summation over primes starts above it."""
    return max(3.0, float(r), r * r / 4.0)


# ---------------------------------------------------------------- pi_{1/2}


def _half_integrand(t: float) -> float:
    return 1.0 / (2.0 * math.sqrt(t) * math.log(t))


def pi_half(x: float, tol: float = 1e-10) -> float:
    """pi_{1/2}(x) = int_2^x dt / (2 sqrt(t) log t)."""
    if x < 2:
        raise DomainError(f"pi_half needs x >= 2, got {x}")
    if x == 2:
        return 0.0
    # split geometrically so the absolute tolerance is met on long ranges
    edges = [2.0]
    while edges[-1] * 4 < x:
        edges.append(edges[-1] * 4)
    edges.append(float(x))
    pieces = [
        adaptive_simpson(_half_integrand, lo, hi, tol / len(edges)) for lo, hi in zip(edges, edges[1:])
    ]
    return math.fsum(pieces)


# ---------------------------------------------------------------- Sato-Tate


def _semicircle_primitive(t: float) -> float:
    t = min(1.0, max(-1.0, t))
    return t * math.sqrt(1.0 - t * t) + math.asin(t)


def sato_tate_measure(alpha: float, beta: float) -> float:
    """F(alpha, beta) = (2/pi) int_alpha^beta sqrt(1 - t^2) dt in closed form."""
    if not (-1.0 <= alpha < beta <= 1.0):
        raise DomainError(f"need -1 <= alpha < beta <= 1, got [{alpha}, {beta}]")
    return (_semicircle_primitive(beta) - _semicircle_primitive(alpha)) / math.pi


@dataclass(frozen=True)
class SatoTateWindow:
    alpha: float
    beta: float
    measure: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "measure", sato_tate_measure(self.alpha, self.beta))

    @property
    def gamma(self) -> float:
        return self.beta - self.alpha


# ---------------------------------------------------------------- predictions


@dataclass(frozen=True)
class Prediction:
    value: float
    tail_bound: float = 0.0


def lt_prediction(r: int, x: float, cutoff: int = DEFAULT_CUTOFF) -> Prediction:
    c = lang_trotter_constant(r, cutoff)
    ph = pi_half(x) if x >= 2 else 0.0
    return Prediction(c.value * ph, c.tail_bound * ph)


def st_prediction(window: SatoTateWindow, x: float) -> Prediction:
    return Prediction(x * window.measure)


# ---------------------------------------------------------------- averaging conditions


@dataclass
class ExperimentConfig:
    """Family box plus the parameters that only feed condition verdicts."""

    A: int
    B: int
    x: float
    epsilon: float = 0.01
    C: float = 2.0
    c: float = 1.0
    exclude_zero_ab: bool = False
    exclude_all_cm: bool = False

    def __post_init__(self):
        if self.A < 1 or self.B < 1:
            raise DomainError("A and B must be >= 1")

    def lt_conditions(self) -> dict[str, bool]:
        x, eps, AB = self.x, self.epsilon, self.A * self.B
        return {
            "A_gt_x^eps": self.A > x**eps,
            "B_gt_x^eps": self.B > x**eps,
            "AB_gt_x^(3/2+eps)": AB > x ** (1.5 + eps),
            "AB_lt_x^C": AB < x**self.C,
            "C_gt_3/2+eps": self.C > 1.5 + eps,
        }

    def st_conditions(self, window: SatoTateWindow) -> dict[str, bool]:
        x, eps, AB = self.x, self.epsilon, self.A * self.B
        F = window.measure
        ratio = window.gamma / window.beta if window.beta != 0 else math.inf
        return {
            "A_gt_x^eps": self.A > x**eps,
            "B_gt_x^eps": self.B > x**eps,
            "AB_gt_x^(1+eps)/F": AB > x ** (1 + eps) / F,
            "AB_lt_x^C": AB < x**self.C,
            "C_gt_3/2+2eps": self.C > 1.5 + 2 * eps,
            "gamma/beta_in_[x^(eps-5/12),x^-eps]": x ** (eps - 5 / 12) <= ratio <= x ** (-eps),
            "F_ge_x^(-1/2+eps)": F >= x ** (-0.5 + eps),
            "0<alpha<beta<=1": 0 < window.alpha < window.beta <= 1,
            "window_avoids_-1_0_1": not any(window.alpha <= t <= window.beta for t in (-1.0, 0.0, 1.0)),
        }
