import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from nlhelm.errors import NearSingularDispersion, OutOfDomain
from nlhelm.greens import (GreenFree, GreenNonlocalExp, WeightFunction, convolve_green,
                           exact_solution_exp, green_free, local_from_nonlocal,
                           nonlocal_apply, weight_w1, weight_w2, weighted_average)
from nlhelm.discretization import Grid
from nlhelm.kernels import KernelSpec
from nlhelm.source import SourceFunction

K, DELTA = 1.6, 1 / 16


def test_green_free_values():
    assert green_free(2.0, 0.0, 0.0) == pytest.approx(0.25j)
    assert green_free(2.0, 0.0, 1.0) == pytest.approx(-0.227324 - 0.104037j, abs=1e-6)
    assert green_free(3j, 0.0, -2.0) == pytest.approx(math.exp(-6) / 6, rel=1e-14)
    assert GreenFree(2.0, 1.0)(1.0) == pytest.approx(0.25j)


def test_green_free_solves_helmholtz_away_from_source():
    kt, h = 1.7 + 0.2j, 1e-3
    x = np.array([0.5, 1.3, -2.0])
    d2 = (green_free(kt, 0, x + h) - 2 * green_free(kt, 0, x) + green_free(kt, 0, x - h)) / h**2
    assert np.max(np.abs(-d2 - kt**2 * green_free(kt, 0, x))) < 1e-5
    # unit jump of -G' at the source
    jump = (green_free(kt, 0, h) - green_free(kt, 0, 0)) / h * 2
    assert jump == pytest.approx(-1.0, abs=1e-2)


def test_nonlocal_green_amplitudes():
    g = GreenNonlocalExp(K, DELTA)
    assert g.regular_amplitude == pytest.approx(1 / 0.99**2)
    assert g.dirac_weight == pytest.approx(DELTA**2 / 0.99)
    with pytest.raises(NearSingularDispersion):
        GreenNonlocalExp(16.0, 1 / 16)


@pytest.mark.parametrize("support", [math.inf, 10.0, 3.0])
@pytest.mark.parametrize("kt", [1.6080605, 0.7 + 0.3j, 34.9j])
def test_closed_convolution_matches_quadrature(kt, support):
    f = SourceFunction.gaussian_narrow(K, support=support)
    x = np.array([-12.0, -3.0, 0.0, 0.7, 3.0, 9.9])
    a = convolve_green(kt, f, x, method="closed")
    b = convolve_green(kt, f, x, method="quad")
    assert np.max(np.abs(a - b)) < 1e-10 * max(1.0, np.max(np.abs(b)))


def test_exact_solution_zero_source():
    assert np.all(exact_solution_exp(K, DELTA, SourceFunction.zero(), np.linspace(-5, 5, 7)) == 0)


def test_exact_solution_brute_force_at_origin():
    f = SourceFunction.gaussian_narrow(K)
    g = GreenNonlocalExp(K, DELTA)
    y = np.linspace(0, 60, 100001)
    vals = green_free(g.ktilde, 0.0, y) * f(y)
    conv = 2 * integrate.simpson(vals, x=y)
    brute = g.regular_amplitude * conv + g.dirac_weight * f(0.0)
    assert exact_solution_exp(K, DELTA, f, 0.0) == pytest.approx(brute, rel=1e-10)


def test_small_delta_limit_is_local_solution():
    f = SourceFunction.gaussian_narrow(K)
    x = np.linspace(-3, 3, 5)
    u = exact_solution_exp(K, 1e-6, f, x)
    assert np.max(np.abs(u - convolve_green(K, f, x))) < 1e-10


def test_local_from_nonlocal():
    assert local_from_nonlocal(2.0, 0.0, K, DELTA) == pytest.approx(0.99**2 * 2.0)
    f = SourceFunction.gaussian_narrow(K)
    x = np.linspace(-4, 4, 9)
    u = exact_solution_exp(K, DELTA, f, x)
    loc = local_from_nonlocal(u, f(x), K, DELTA)
    kt = GreenNonlocalExp(K, DELTA).ktilde
    # the local problem is posed with source (1 - (delta k)^2) f
    assert np.max(np.abs(loc - convolve_green(kt, f, x))) < 1e-13


def test_weights():
    kernel = KernelSpec("exp", DELTA)
    kt = GreenNonlocalExp(K, DELTA).ktilde.real
    kappa = WeightFunction(kernel, kt)
    t = np.array([-0.3, -0.01, 0.0, 0.02, 0.5])
    assert np.max(np.abs(kappa(t) - kappa.closed_form_exp(K, t))) < 1e-8
    assert weight_w1(kernel, kt, -3.0) == pytest.approx(0.0, abs=1e-14)
    assert weight_w2(kernel, kt, 3.0) == pytest.approx(0.0, abs=1e-14)
    tt, vals = kappa.tabulation
    assert np.max(np.abs(vals - vals[::-1])) < 1e-12


def test_weighted_average_of_constant():
    kernel = KernelSpec("exp", DELTA)
    kappa = WeightFunction(kernel, GreenNonlocalExp(K, DELTA).ktilde.real)
    val = weighted_average(lambda y: 2.0 * np.ones_like(y), kappa, 0.3)
    assert val == pytest.approx(2.0 * 0.99, rel=1e-12)
    assert weighted_average(np.zeros_like, kappa, 0.0) == 0


def test_weighted_average_nodal_window_check():
    kernel = KernelSpec("exp", DELTA)
    kappa = WeightFunction(kernel, 1.6)
    grid = Grid(h=0.1, N=30, M=20)
    with pytest.raises(OutOfDomain):
        weighted_average(np.ones(grid.size), kappa, 2.0, grid=grid)
    assert weighted_average(np.ones(grid.size), kappa, 0.0, grid=grid) == pytest.approx(
        1 / (1 + (DELTA * 1.6) ** 2), rel=1e-10)


@settings(max_examples=15, deadline=None)
@given(st.floats(-0.5, 0.5), st.floats(0.2, 3.0))
def test_nonlocal_apply_on_quadratics(x, c):
    kernel = KernelSpec("gauss", 0.05)
    # second moment normalisation: L(c x^2) = -2c exactly
    assert nonlocal_apply(kernel, lambda y: c * y * y, x) == pytest.approx(-2 * c, rel=1e-10)
