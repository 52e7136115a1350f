"""Parent kernels, their horizon rescaling and complex continuation.

Both supported families are even, nonnegative and normalised so that
``0.5 * integral(s**2 * parent(s)) == 1``.  Infinite-support kernels are
truncated at an effective radius where the parent falls below a tolerance.
"""
from dataclasses import dataclass
from enum import Enum
import math

import numpy as np

from .quadrature import composite

GAUSS_PEAK = 4.0 / math.sqrt(math.pi)


class Family(str, Enum):
    EXPONENTIAL = "exp"
    GAUSSIAN = "gauss"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        aliases = {"exp": cls.EXPONENTIAL, "exponential": cls.EXPONENTIAL,
                   "gauss": cls.GAUSSIAN, "gaussian": cls.GAUSSIAN}
        try:
            return aliases[str(value).lower()]
        except KeyError:
            raise ValueError(f"unknown kernel family {value!r}") from None


def _exp_parent(s):
    return 0.5 * np.exp(-np.abs(s))


def _exp_complex(z):
    # branch of sqrt(z**2) with nonnegative real part; purely imaginary z maps to |Im z|
    re = np.real(z)
    rho = np.where(re > 0, z, np.where(re < 0, -z, np.abs(np.imag(z)) + 0j))
    return 0.5 * np.exp(-rho)


def _exp_radius(eps):
    return max(math.log(1.0 / (2.0 * eps)), 0.0)


def _gauss_parent(s):
    return GAUSS_PEAK * np.exp(-np.square(s))


def _gauss_complex(z):
    return GAUSS_PEAK * np.exp(-np.square(z))


def _gauss_radius(eps):
    return math.sqrt(max(math.log(GAUSS_PEAK / eps), 0.0))


# a third family plugs in here with (parent, complex continuation, radius)
_FAMILIES = {
    Family.EXPONENTIAL: (_exp_parent, _exp_complex, _exp_radius),
    Family.GAUSSIAN: (_gauss_parent, _gauss_complex, _gauss_radius),
}


@dataclass(frozen=True)
class KernelSpec:
    family: Family
    delta: float
    support_tolerance: float = 1e-16

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if not 0 < self.support_tolerance < 1:
            raise ValueError("support_tolerance must lie in (0, 1)")

    @property
    def radius(self):
        """Effective radius of the parent kernel (in units of delta)."""
        return effective_radius(self)

    @property
    def reach(self):
        """Physical interaction length delta * radius."""
        return self.delta * effective_radius(self)


def eval_parent(kernel, s):
    return _FAMILIES[kernel.family][0](s)


def eval_rescaled(kernel, s):
    d = kernel.delta
    return eval_parent(kernel, np.asarray(s) / d) / d**3


def eval_complex(kernel, z):
    """Analytic continuation of the parent kernel to a complex separation."""
    return _FAMILIES[kernel.family][1](np.asarray(z, dtype=complex))


def eval_rescaled_complex(kernel, z):
    d = kernel.delta
    return eval_complex(kernel, np.asarray(z, dtype=complex) / d) / d**3


def effective_radius(kernel):
    return _FAMILIES[kernel.family][2](kernel.support_tolerance)


def second_moment(kernel):
    """Half the second moment of the truncated parent kernel."""
    r = effective_radius(kernel)
    val = composite(lambda s: s * s * eval_parent(kernel, s), 0.0, r, panels=64)
    # even integrand: 0.5 * 2 * half-line integral
    return float(val)
