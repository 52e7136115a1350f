import math
import threading
import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nlhelm.analysis import (decay_slope, discrete_h1_semi, discrete_l2, fit_rate,
                             parallel_map, relative_errors, truncation_sweep, _exp_fit)
from nlhelm.config import ExperimentConfig
from nlhelm.errors import EmptyFit, EmptyRegion, UnderflowWindow, ZeroReference


def test_l2_examples():
    x = np.linspace(-10, 10, 2001)
    assert discrete_l2(np.zeros_like(x), x, (-10, 10)) == 0
    assert discrete_l2(np.ones_like(x), x, (-10, 10)) == pytest.approx(math.sqrt(20))
    x = np.arange(-2**10, 2**10 + 1) / 2**10
    assert discrete_l2(x, x, (-1, 1)) == pytest.approx(math.sqrt(2 / 3), abs=1e-5)


def test_h1_examples():
    x = np.arange(-2**10, 2**10 + 1) / 2**10
    assert discrete_h1_semi(np.full_like(x, 3.0), x, (-1, 1)) == 0
    assert discrete_h1_semi(x, x, (-1, 1)) == pytest.approx(math.sqrt(2))
    x = np.linspace(0, math.pi, 2**10 + 1)
    assert discrete_h1_semi(np.sin(x), x, (0, math.pi)) == pytest.approx(
        math.sqrt(math.pi / 2), abs=1e-3)


def test_empty_region():
    x = np.linspace(0, 1, 11)
    with pytest.raises(EmptyRegion):
        discrete_l2(x, x, (2, 3))
    with pytest.raises(EmptyRegion):
        discrete_h1_semi(x, x, (0.41, 0.49))


def test_norms_converge_at_least_first_order():
    errs = []
    for n in (64, 128, 256):
        x = np.linspace(0, 2, n + 1)
        errs.append(abs(discrete_h1_semi(np.exp(x), x, (0, 2))
                        - math.sqrt((math.exp(4) - 1) / 2)))
    assert errs[0] / errs[1] > 1.9 and errs[1] / errs[2] > 1.9


def test_relative_error_examples():
    x = np.linspace(-10, 10, 401)
    v = np.sin(x) + 0.5j * np.cos(2 * x)
    norm = math.hypot(discrete_l2(v, x, (-10, 10)), discrete_h1_semi(v, x, (-10, 10)))
    r = relative_errors(v, x, v, (-10, 10))
    assert r.e_l2 == 0 and r.e_h1 == 0
    r = relative_errors(v + 0.3, x, v, (-10, 10))
    assert r.e_h1 == pytest.approx(0, abs=1e-14)
    assert r.e_l2 == pytest.approx(0.3 * math.sqrt(20) / norm)
    r = relative_errors(2 * v, x, v, (-10, 10))
    assert r.e_l2 == pytest.approx(discrete_l2(v, x, (-10, 10)) / norm)
    assert r.e_h1 == pytest.approx(discrete_h1_semi(v, x, (-10, 10)) / norm)
    with pytest.raises(ZeroReference):
        relative_errors(v, x, np.zeros_like(v), (-10, 10))


def test_relative_error_against_callable_refines():
    # linear interpolant error of sin: H1 rate 1, L2 rate 2 on the refined grid
    rates = []
    prev = None
    for n in (32, 64, 128):
        x = np.linspace(0, 3, n + 1)
        r = relative_errors(np.sin(x), x, np.sin, (0, 3))
        if prev:
            rates.append((math.log2(prev.e_l2 / r.e_l2), math.log2(prev.e_h1 / r.e_h1)))
        prev = r
    for rl2, rh1 in rates:
        assert rl2 == pytest.approx(2, abs=0.1) and rh1 == pytest.approx(1, abs=0.1)


@settings(max_examples=30, deadline=None)
@given(st.complex_numbers(min_magnitude=0.1, max_magnitude=1e3, allow_nan=False,
                          allow_infinity=False))
def test_relative_errors_scale_invariant(c):
    x = np.linspace(0, 4, 81)
    v2 = np.exp(1j * x) * (1 + x)
    v1 = v2 + 0.01 * np.cos(3 * x)
    a = relative_errors(v1, x, v2, (0, 4))
    b = relative_errors(c * v1, x, c * v2, (0, 4))
    assert b.e_l2 == pytest.approx(a.e_l2, rel=1e-9)
    assert b.e_h1 == pytest.approx(a.e_h1, rel=1e-9)


def test_fit_rate():
    hs = [0.1 / 2**i for i in range(5)]
    fit = fit_rate(hs, [3 * h**2 for h in hs])
    assert fit.slope == pytest.approx(2) and fit.r_squared == pytest.approx(1)
    assert len(fit.points) == 5
    with pytest.raises(EmptyFit):
        fit_rate([0.1], [0.2])
    # plateau at coarse h is skipped
    errs = [0.5, 0.5, 0.5 * 0.25, 0.5 / 16, 0.5 / 64]
    assert fit_rate(hs, errs).slope == pytest.approx(2, abs=1e-9)
    # points near the reference floor are dropped
    errs = [h**2 for h in hs[:3]] + [1.1e-6, 1e-6]
    assert fit_rate(hs, errs, floor=1e-6).slope == pytest.approx(2, abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.1, 50.0), st.floats(-5, 5))
def test_decay_slope_recovers_planted_rate(rate, shift):
    x = np.linspace(0, 2, 201)
    v = np.exp(-rate * (x - shift)) * np.exp(1j * 7 * x)
    assert decay_slope(v, x, (0, 2)) == pytest.approx(-rate, abs=1e-8)


def test_decay_slope_examples():
    x = np.linspace(0, 1, 101)
    assert decay_slope(np.exp(-3 * x), x, (0, 1)) == pytest.approx(-3, abs=1e-10)
    assert decay_slope(np.exp(-3 * x**2), x, (0, 1), against=lambda t: t**2) == pytest.approx(-3)
    with pytest.raises(UnderflowWindow):
        decay_slope(np.where(x < 0.5, 1.0, 0.0), x, (0, 1))


def test_exp_fit_on_prefloor_segment():
    v = [0, 1, 2, 3, 4, 5]
    e = [math.exp(-2 * t) + 1e-6 for t in v[:4]] + [1.2e-6, 1.1e-6]
    c1, c2 = _exp_fit(v, e)
    assert c2 > 1.5
    with pytest.raises(EmptyFit):
        _exp_fit([0, 1], [1e-6, 1e-6])


def test_parallel_map_keeps_order(monkeypatch):
    monkeypatch.setenv("NLHELM_THREADS", "4")
    seen = []

    def slow(i):
        time.sleep(0.01 * (5 - i))
        seen.append(i)
        return i * i

    assert parallel_map(slow, range(5)) == [0, 1, 4, 9, 16]
    monkeypatch.setenv("NLHELM_THREADS", "bogus")
    assert parallel_map(lambda i: -i, [1, 2]) == [-1, -2]


def test_truncation_sweep_small():
    cfg = ExperimentConfig(k=2 * math.pi / 5, delta=1 / (4 * math.pi), h=1 / 8)
    res = truncation_sweep(cfg, "sigma0", [0.0, 0.5, 1.0, 2.0])
    e = [r[1] for r in res.rows]
    assert e[0] == max(e)
    assert res.c2_l2 > 0
