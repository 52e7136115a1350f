import math

import numpy as np
import pytest

from nlhelm.kernels import KernelSpec


@pytest.fixture
def exp_kernel():
    return KernelSpec("exp", 1.0 / 16)


@pytest.fixture
def gauss_kernel():
    return KernelSpec("gauss", 1.0 / (4 * math.pi))


def rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)
