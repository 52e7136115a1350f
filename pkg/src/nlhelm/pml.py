"""Linear-ramp absorption profile and the complex coordinate stretch it induces."""
from dataclasses import dataclass
import math

import numpy as np


@dataclass(frozen=True)
class PmlProfile:
    """Layer geometry: physical domain (-l, l), layers of thickness d.

    ``sigma(t) = (sigma0 / d) * (|t| - l)`` outside the physical domain.  The
    ramp is continued past ``l + d`` so the Dirichlet buffer sees a smooth
    medium.
    """

    l: float
    d: float
    sigma0: float = 0.0

    def __post_init__(self):
        if not (self.l > 0 and self.d > 0):
            raise ValueError("l and d must be positive")
        if self.sigma0 < 0:
            raise ValueError("sigma0 must be nonnegative")

    @property
    def slope(self):
        return self.sigma0 / self.d


def _excess(p, x):
    return np.maximum(np.abs(x) - p.l, 0.0)


def sigma(p, t):
    return p.slope * _excess(p, t)


def omega(p, x):
    return 1.0 + 1j * sigma(p, x)


def stretch(p, x):
    """Closed-form x~(x) = integral_0^x omega."""
    x = np.asarray(x, dtype=float)
    return x + 1j * np.sign(x) * (0.5 * p.slope) * _excess(p, x) ** 2


def sigma_integral(p, x):
    return 0.5 * p.slope * _excess(p, x) ** 2


def choose_sigma0(ktilde_decay, d, target, amplitude=1.0):
    """Smallest sigma0 with ``amplitude * exp(-ktilde_decay * sigma0 * d / 2) <= target``."""
    if amplitude <= target:
        return 0.0
    return 2.0 * math.log(amplitude / target) / (ktilde_decay * d)
