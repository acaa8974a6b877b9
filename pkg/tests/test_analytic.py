import math

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from frobavg.analytic import (
    ExperimentConfig,
    SatoTateWindow,
    adaptive_simpson,
    b_cutoff,
    lang_trotter_constant,
    local_factor,
    lt_prediction,
    pi_half,
    sato_tate_measure,
    st_prediction,
)
from frobavg.errors import DomainError


def li_oracle(x):
    """pi_{1/2}(x) = (1/2) int_{sqrt 2}^{sqrt x} du / log u = (li(sqrt x) - li(sqrt 2)) / 2."""
    return float((mpmath.li(mpmath.sqrt(x)) - mpmath.li(mpmath.sqrt(2))) / 2)


def midpoint_oracle(x, n=1 << 16):
    """Midpoint rule on the substituted integrand, Richardson-extrapolated once."""
    a, b = math.sqrt(2), math.sqrt(x)

    def mid(k):
        h = (b - a) / k
        return h * math.fsum(1 / math.log(a + (i + 0.5) * h) for i in range(k)) / 2

    return (4 * mid(n) - mid(n // 2)) / 3


def test_adaptive_simpson_polynomial():
    assert adaptive_simpson(lambda t: t**3, 0, 2) == pytest.approx(4, abs=1e-12)


def test_sato_tate_measure_exact_points():
    assert sato_tate_measure(-1, 1) == pytest.approx(1, abs=1e-12)
    assert sato_tate_measure(0, 1) == pytest.approx(0.5, abs=1e-12)
    assert sato_tate_measure(0.25, 0.75) == pytest.approx(0.2703720148299526, abs=1e-12)


@pytest.mark.parametrize("a,b", [(-2, 0), (0.5, 0.5), (0.7, 0.2), (0, 1.01)])
def test_sato_tate_measure_domain(a, b):
    with pytest.raises(DomainError):
        sato_tate_measure(a, b)


@settings(max_examples=100)
@given(st.lists(st.floats(-1, 1), min_size=3, max_size=3, unique=True))
def test_sato_tate_additive_and_symmetric(ts):
    a, b, d = sorted(ts)
    if b - a < 1e-12 or d - b < 1e-12:
        return
    assert sato_tate_measure(a, b) + sato_tate_measure(b, d) == pytest.approx(sato_tate_measure(a, d), abs=1e-12)
    assert sato_tate_measure(-b, -a) == pytest.approx(sato_tate_measure(a, b), abs=1e-12)


def test_window():
    w = SatoTateWindow(0.25, 0.75)
    assert w.gamma == 0.5 and w.measure == sato_tate_measure(0.25, 0.75)


def test_pi_half_values():
    assert pi_half(2) == 0
    assert pi_half(100) == pytest.approx(3.14, abs=0.05)
    assert pi_half(1e4) > pi_half(1e3)
    with pytest.raises(DomainError):
        pi_half(1.5)


@pytest.mark.parametrize("x", [10, 100, 1e4])
def test_pi_half_independent_oracles(x):
    assert pi_half(x) == pytest.approx(li_oracle(x), abs=1e-8)
    assert midpoint_oracle(x) == pytest.approx(li_oracle(x), abs=1e-8)


def test_pi_half_asymptotic_ratio_report():
    ratios = [pi_half(x) * math.log(x) / math.sqrt(x) for x in (1e4, 1e6, 1e8)]
    print("pi_half(x) log x / sqrt x:", ratios)
    assert ratios[0] > ratios[1] > ratios[2] > 1


def test_lang_trotter_factor_and_closed_form():
    assert local_factor(2, 1) == pytest.approx(2 / 3)
    c0 = lang_trotter_constant(0, 10**6)
    assert c0.closed_form == pytest.approx(math.pi / 3)
    assert abs(c0.value - math.pi / 3) <= 1e-5
    assert abs(c0.value - math.pi / 3) <= c0.tail_bound
    with pytest.raises(DomainError):
        lang_trotter_constant(1, 50)


@pytest.mark.parametrize("r", [0, 1, 2, -3, 6, 30])
def test_lang_trotter_convergence(r):
    small, big = lang_trotter_constant(r, 5000), lang_trotter_constant(r, 10000)
    assert small.value > 0
    assert big.tail_bound < small.tail_bound
    assert abs(big.value - small.value) < small.tail_bound


def test_lang_trotter_direct_product():
    from frobavg.ffield import primes_upto

    prod = 2 / math.pi
    for p in primes_upto(1000):
        prod *= local_factor(int(p), 12)
    assert lang_trotter_constant(12, 1000).value == pytest.approx(prod, rel=1e-12)


def test_b_cutoff():
    assert b_cutoff(0) == 3 and b_cutoff(2) == 3 and b_cutoff(5) == 6.25 and b_cutoff(-8) == 16


def test_predictions():
    p = lt_prediction(0, 100)
    assert p.value == pytest.approx(math.pi / 3 * li_oracle(100), rel=1e-6)
    assert p.value == pytest.approx(3.28, abs=0.01)
    assert st_prediction(SatoTateWindow(-1, 1), 50).value == pytest.approx(50)
    thin = st_prediction(SatoTateWindow(0.99, 1), 1000).value
    assert 0 < thin < 0.01 * 1000


def test_quadrature_grid_against_scipy():
    grid = [(-1 + 0.2 * i, -1 + 0.2 * i + 0.1 * (k + 1)) for i in range(10) for k in range(10)]
    grid = [(a, min(b, 1.0)) for a, b in grid if a < min(b, 1.0)]
    for a, b in grid:
        ref = quad(lambda t: 2 / math.pi * math.sqrt(1 - t * t), a, b, epsabs=1e-13, epsrel=1e-12, limit=200)[0]
        assert abs(sato_tate_measure(a, b) - ref) <= 1e-10


def test_experiment_config_verdicts():
    cfg = ExperimentConfig(15, 15, 2000)
    v = cfg.lt_conditions()
    assert v["A_gt_x^eps"] and not v["AB_gt_x^(3/2+eps)"]
    big = ExperimentConfig(10**6, 10**6, 100).lt_conditions()
    assert big["AB_gt_x^(3/2+eps)"]
    sv = cfg.st_conditions(SatoTateWindow(0.25, 0.75))
    assert sv["0<alpha<beta<=1"] and sv["window_avoids_-1_0_1"]
    assert not cfg.st_conditions(SatoTateWindow(-0.5, 0.5))["window_avoids_-1_0_1"]
    with pytest.raises(DomainError):
        ExperimentConfig(0, 1, 10)
