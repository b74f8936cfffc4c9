import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from bmrange.errors import DomainError
from bmrange.kernels import g, g_prime, g_second

xs = st.floats(-50, 50, allow_nan=False)
ts = st.floats(1e-3, 100)


def test_g_at_zero():
    assert g(0.0, 1.0) == pytest.approx(1 / math.sqrt(2 * math.pi), abs=1e-15)


def test_g_matches_standard_normal_pdf():
    # scipy.stats.norm.pdf(1.0)
    assert g(1.0, 1.0) == pytest.approx(0.24197072451914337, abs=1e-15)


def test_g_prime_finite_difference():
    h = 1e-5
    fd = (g(0.7 + h, 2.0) - g(0.7 - h, 2.0)) / (2 * h)
    assert g_prime(0.7, 2.0) == pytest.approx(fd, abs=1e-8)
    assert g_prime(0.0, 1.0) == 0.0


def test_g_second_finite_difference():
    h = 1e-4
    x, t = 1.3, 0.5
    fd = (g(x + h, t) - 2 * g(x, t) + g(x - h, t)) / h**2
    assert g_second(x, t) == pytest.approx(fd, abs=1e-6)


def test_g_second_special_points():
    assert g_second(0.0, 1.0) == pytest.approx(-1 / math.sqrt(2 * math.pi), abs=1e-15)
    for t in (0.1, 1.0, 7.0):
        assert abs(g_second(math.sqrt(t), t)) < 1e-15


def test_g_integrates_to_one():
    for t in (0.01, 1.0, 9.0):
        w = 10 * math.sqrt(t)
        val, _ = quad(lambda x: g(x, t), -w, w, epsabs=1e-13, epsrel=1e-13)
        assert val == pytest.approx(1.0, abs=1e-9)


def test_underflow_clamp():
    assert g(40.1, 1.0) == 0.0
    assert g_prime(-41.0, 1.0) == 0.0
    assert g_second(100.0, 4.0) == 0.0
    assert g(37.0, 1.0) > 0.0


def test_broadcasting():
    x = np.linspace(-3, 3, 7)
    out = g_second(x[:, None], np.array([0.5, 1.0, 2.0])[None, :])
    assert out.shape == (7, 3)


@pytest.mark.parametrize("fn", [g, g_prime, g_second])
@pytest.mark.parametrize("x, t", [(0.0, 0.0), (1.0, -1.0), (float("nan"), 1.0), (float("inf"), 1.0)])
def test_domain_errors(fn, x, t):
    with pytest.raises(DomainError):
        fn(x, t)


@given(xs, ts)
def test_parity(x, t):
    assert g(x, t) == g(-x, t)
    assert g_second(x, t) == g_second(-x, t)
    assert g_prime(x, t) == -g_prime(-x, t)


@given(st.floats(-5, 5), st.floats(0.1, 10))
def test_derivatives_are_finite_differences(x, t):
    h = 1e-5
    assert abs(g_prime(x, t) - (g(x + h, t) - g(x - h, t)) / (2 * h)) < 1e-6
    assert abs(g_second(x, t) - (g_prime(x + h, t) - g_prime(x - h, t)) / (2 * h)) < 1e-6


@given(st.floats(-37, 37), ts)
def test_g_positive_inside_clamp(x, t):
    assert g(x * math.sqrt(t), t) > 0
