import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from bmrange.densities import (
    Barriers,
    ProcessParams,
    SeriesControl,
    joint_range_terminal_density,
    psi_kernel,
    terminal_density,
    trivariate_density,
    trivariate_density_douady_form,
)
from bmrange.errors import DomainError
from bmrange.simulation import BETA, EnsembleSpec, PathSpec, simulate_ensemble

from oracles import mixed_difference, normal_pdf

STD = ProcessParams.standard()
DRIFTED = ProcessParams(mu=0.5, sigma=2.0, t=1.0)


def test_params_validation():
    with pytest.raises(DomainError):
        ProcessParams(sigma=0.0)
    with pytest.raises(DomainError):
        ProcessParams(t=-1.0)
    with pytest.raises(DomainError):
        ProcessParams(mu=float("inf"))
    with pytest.raises(DomainError):
        SeriesControl(n_max=0)
    with pytest.raises(DomainError):
        Barriers(0.0, 1.0, 0.0)
    with pytest.raises(DomainError):
        joint_range_terminal_density(STD, 0.0, 0.0)
    assert ProcessParams.standard(2.0) == ProcessParams(0.0, 1.0, 2.0)


@pytest.mark.parametrize("fn", [psi_kernel, trivariate_density, trivariate_density_douady_form])
def test_zero_outside_support(fn):
    assert fn(STD, Barriers(1.0, 0.5, 1.2)) == 0.0
    assert fn(DRIFTED, Barriers(1.0, 0.5, -0.6)) == 0.0


def test_joint_zero_outside_support():
    assert joint_range_terminal_density(STD, 1.0, 1.01) == 0.0
    assert joint_range_terminal_density(DRIFTED, 1.0, -1.5) == 0.0


def test_psi_far_barriers_is_free_density():
    assert psi_kernel(STD, Barriers(50.0, 50.0, 0.0)) == pytest.approx(1 / math.sqrt(2 * math.pi), abs=1e-12)


def test_psi_drifted_far_barriers_is_normal():
    for x in (-1.0, 0.3, 2.0):
        assert psi_kernel(DRIFTED, Barriers(80.0, 80.0, x)) == pytest.approx(
            normal_pdf(x, DRIFTED.mu * DRIFTED.t, DRIFTED.variance), rel=1e-12
        )


def _mc_psi(n_paths, n_steps, seed, half_width=0.1):
    ens = simulate_ensemble(EnsembleSpec(PathSpec(n_steps=n_steps, seed=seed), n_paths))
    hit = (ens.maximum <= 1.0) & (ens.minimum >= -1.0) & (np.abs(ens.terminal) <= half_width)
    p = hit.mean()
    return p / (2 * half_width), math.sqrt(p * (1 - p) / n_paths) / (2 * half_width)


def _psi_bin(h, l, half_width=0.1):
    return quad(lambda x: psi_kernel(STD, Barriers(h, l, x)), -half_width, half_width)[0] / (2 * half_width)


def test_psi_against_monte_carlo():
    n_steps = 1000
    est, se = _mc_psi(100_000, n_steps, seed=7)
    # discrete monitoring misses crossings: shift barriers out by BETA*sqrt(dt)
    shift = BETA * math.sqrt(1.0 / n_steps)
    assert abs(est - _psi_bin(1.0 + shift, 1.0 + shift)) < 4 * se + 2e-3
    assert est > _psi_bin(1.0, 1.0)


@pytest.mark.slow
def test_psi_against_monte_carlo_full():
    n_steps = 10_000
    est, se = _mc_psi(1_000_000, n_steps, seed=8)
    shift = BETA * math.sqrt(1.0 / n_steps)
    assert abs(est - _psi_bin(1.0 + shift, 1.0 + shift)) < 4 * se + 5e-4


def test_trivariate_reflection_symmetry():
    for h, l, x in [(1.0, 0.5, 0.2), (0.3, 2.0, -1.1), (1.5, 1.5, 0.0)]:
        a = trivariate_density(STD, Barriers(h, l, x))
        b = trivariate_density(STD, Barriers(l, h, -x))
        assert a == pytest.approx(b, rel=1e-12, abs=1e-15)


def test_trivariate_is_mixed_derivative_of_psi():
    f = lambda h, l: psi_kernel(STD, Barriers(h, l, 0.0))
    assert trivariate_density(STD, Barriers(1.0, 1.0, 0.0)) == pytest.approx(mixed_difference(f, 1.0, 1.0), rel=1e-4)


@pytest.mark.parametrize("mu, sigma", [(0.0, 1.0), (0.5, 2.0), (-1.0, 1.0), (-1.0, 2.0)])
def test_douady_form_equivalence(mu, sigma):
    p = ProcessParams(mu, sigma, 1.0)
    rng = np.random.default_rng(3)
    h = rng.uniform(0.1, 3.0, 100) * sigma
    l = rng.uniform(0.1, 3.0, 100) * sigma
    x = rng.uniform(-l, h)
    sc = SeriesControl(n_max=50)
    a = trivariate_density(p, Barriers(h, l, x), sc)
    b = trivariate_density_douady_form(p, Barriers(h, l, x), sc)
    assert np.max(np.abs(a - b)) < 1e-12


def test_douady_single_point():
    b = Barriers(0.8, 1.2, 0.3)
    sc = SeriesControl(n_max=50)
    assert abs(trivariate_density(STD, b, sc) - trivariate_density_douady_form(STD, b, sc)) < 1e-12


def test_nonnegativity_trivariate_grid():
    hs = np.linspace(0.06, 3.0, 50)
    H, L, U = np.meshgrid(hs, hs, np.linspace(0.0, 1.0, 50), indexing="ij")
    X = -L + U * (H + L)
    vals = trivariate_density(STD, Barriers(H, L, X))
    assert vals.min() >= -1e-10


def test_nonnegativity_joint_grid():
    r = np.linspace(0.02, 5.0, 50)
    R, U = np.meshgrid(r, np.linspace(-1.0, 1.0, 50), indexing="ij")
    vals = joint_range_terminal_density(STD, R, U * R)
    assert vals.min() >= -1e-10


@pytest.mark.parametrize("p", [STD, DRIFTED])
@pytest.mark.parametrize("r, x", [(1.0, 0.0), (1.5, 0.7), (2.5, -1.9), (0.6, 0.59)])
def test_integration_over_h_gives_joint(p, r, x):
    r = r * p.sigma
    x = x * p.sigma
    lo, hi = max(0.0, x), min(r, r + x)
    direct, _ = quad(lambda h: trivariate_density(p, Barriers(h, r - h, x)), lo, hi, epsabs=1e-13, epsrel=1e-11)
    assert joint_range_terminal_density(p, r, x) == pytest.approx(direct, rel=1e-4)


@pytest.mark.parametrize("p", [STD, DRIFTED, ProcessParams(-0.3, 1.0, 2.0)])
@pytest.mark.parametrize("x", [-1.0, 0.0, 0.5])
def test_marginal_recovery(p, x):
    top = 12 * math.sqrt(p.t) * max(1.0, p.sigma)
    val, _ = quad(lambda r: joint_range_terminal_density(p, r, x), abs(x), top, limit=200, epsabs=1e-12)
    assert val == pytest.approx(terminal_density(p, x), abs=1e-4)


def test_joint_continuous_at_edge():
    r = 1.3
    edge = joint_range_terminal_density(STD, r, r)
    near = joint_range_terminal_density(STD, r, r - 1e-7)
    assert edge == pytest.approx(near, abs=1e-5)


def test_truncation_decay():
    sc50 = SeriesControl(n_max=50)
    sc100 = SeriesControl(n_max=100)
    r = np.linspace(0.1, 4.0, 40)
    x = 0.3 * r
    a = joint_range_terminal_density(STD, r, x, sc50)
    b = joint_range_terminal_density(STD, r, x, sc100)
    assert np.max(np.abs(a - b)) < sc50.tail_tol
    # at r >= 1 the n = +-50 images sit beyond the 40-sigma clamp
    from bmrange.kernels import g_second

    assert g_second(2 * 50 * 1.0 - 1.0, 1.0) == 0.0


def test_small_range_escalation_converges():
    # needs n_max far above the default to reach the tail tolerance
    r = np.array([0.03, 0.05, 0.08])
    a = joint_range_terminal_density(STD, r, 0.0, SeriesControl(n_max=1))
    b = joint_range_terminal_density(STD, r, 0.0, SeriesControl(n_max=4096))
    assert np.allclose(a, b, atol=1e-12)
    assert np.all(np.abs(a) < 1e-12)


def test_negligible_width_is_zero():
    assert joint_range_terminal_density(STD, 1e-3, 0.0) == 0.0
    assert trivariate_density(STD, Barriers(5e-3, 5e-3, 0.0)) == 0.0


@settings(max_examples=60, deadline=None)
@given(
    st.floats(0.2, 2.5),
    st.floats(0.2, 2.5),
    st.floats(0.02, 0.98),
    st.sampled_from([STD, DRIFTED]),
)
def test_derivative_consistency_property(h, l, u, p):
    h, l = h * p.sigma, l * p.sigma
    x = -l + u * (h + l)
    exact = trivariate_density(p, Barriers(h, l, x))
    fd = mixed_difference(lambda hh, ll: psi_kernel(p, Barriers(hh, ll, x)), h, l)
    # central-difference roundoff is about eps * psi / step^2 ~ 1e-8
    assert abs(fd - exact) <= 1e-3 * abs(exact) + 2e-8
