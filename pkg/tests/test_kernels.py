import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nlhelm.kernels import (Family, KernelSpec, effective_radius, eval_complex, eval_parent,
                            eval_rescaled, eval_rescaled_complex, second_moment)

EXP = KernelSpec("exp", 1.0)
GAU = KernelSpec("gauss", 1.0)


def test_parent_values():
    assert eval_parent(EXP, 0.0) == 0.5
    assert eval_parent(EXP, -2.0) == pytest.approx(0.5 * math.exp(-2), abs=1e-15)
    assert eval_parent(EXP, -2.0) == eval_parent(EXP, 2.0)
    assert eval_parent(GAU, 0.0) == pytest.approx(4 / math.sqrt(math.pi), rel=1e-15)


def test_rescaled_values():
    assert eval_rescaled(EXP, 0.0) == 0.5
    assert eval_rescaled(KernelSpec("exp", 0.5), 0.0) == pytest.approx(4.0)
    expected = (1 / 8) * (4 / math.sqrt(math.pi)) * math.exp(-1)
    assert eval_rescaled(KernelSpec("gauss", 2.0), 2.0) == pytest.approx(expected, rel=1e-14)


def test_complex_continuation_values():
    # oracle: cmath on the stated branch
    z = -3 + 1j
    assert eval_complex(EXP, z) == pytest.approx(0.5 * np.exp(-(3 - 1j)), rel=1e-14)
    assert abs(eval_complex(EXP, z) - (0.013451 + 0.020945j)) < 5e-6
    g = eval_complex(GAU, 1 + 1j)
    assert g == pytest.approx(4 / math.sqrt(math.pi) * np.exp(-2j), rel=1e-14)
    assert abs(g - (-0.939121 - 2.052073j)) < 5e-5
    assert eval_complex(EXP, 2 + 0j) == pytest.approx(0.5 * math.exp(-2))


def test_exp_branch_on_imaginary_axis():
    # rho = |Im z| there
    assert eval_complex(EXP, 3j) == pytest.approx(0.5 * math.exp(-3))
    assert eval_complex(EXP, -3j) == pytest.approx(0.5 * math.exp(-3))


def test_effective_radius():
    assert effective_radius(EXP) == pytest.approx(math.log(5e15), rel=1e-12)
    assert effective_radius(EXP) == pytest.approx(36.148, abs=1e-3)
    assert effective_radius(GAU) == pytest.approx(6.136, abs=2e-3)
    assert effective_radius(KernelSpec("exp", 1.0, support_tolerance=0.5)) == 0.0


def test_second_moment():
    assert second_moment(EXP) == pytest.approx(1.0, abs=1e-10)
    assert second_moment(GAU) == pytest.approx(1.0, abs=1e-10)
    loose = KernelSpec("exp", 1.0, support_tolerance=1e-4)
    assert abs(second_moment(loose) - 1.0) < 1e-2


def test_validation():
    with pytest.raises(ValueError):
        KernelSpec("exp", 0.0)
    with pytest.raises(ValueError):
        KernelSpec("cauchy", 1.0)
    assert Family.parse("Gaussian") is Family.GAUSSIAN


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(["exp", "gauss"]), st.floats(-30, 30), st.floats(0.01, 3.0))
def test_even_nonnegative_and_real_axis_agreement(fam, s, delta):
    k = KernelSpec(fam, delta)
    a, b = eval_rescaled(k, s), eval_rescaled(k, -s)
    assert a >= 0 and a == b
    # exp(-q) is accurate to about q * eps; q is |s/delta| or its square
    rel = 1e-15 * (1 + abs(s / delta)) ** 2
    assert eval_rescaled_complex(k, s + 0j) == pytest.approx(a, rel=rel, abs=1e-300)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(["exp", "gauss"]), st.floats(0.01, 2.0))
def test_rescaling_preserves_second_moment(fam, delta):
    k = KernelSpec(fam, delta)
    s = np.linspace(-k.reach, k.reach, 20001)
    m = 0.5 * np.trapezoid(s**2 * eval_rescaled(k, s), s)
    assert m == pytest.approx(1.0, rel=2e-3)
