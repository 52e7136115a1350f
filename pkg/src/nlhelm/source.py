"""Right-hand sides for the Helmholtz problems."""
from dataclasses import dataclass
import math
from typing import Callable, Optional

import numpy as np


@dataclass(frozen=True)
class SourceFunction:
    """A source term f, optionally cut off outside (-support, support).

    With a finite support the value on the cut is the mean of the one-sided
    limits, which keeps nodal sampling and the exact solutions consistent.

    ``width`` is the Gaussian rate ``a`` in ``exp(-a^2 x^2)``; it is ``None``
    for custom callables.
    """

    kind: str
    width: Optional[float] = None
    support: float = math.inf
    func: Optional[Callable] = None

    @classmethod
    def gaussian_narrow(cls, k, support=math.inf):
        """The narrow Gaussian ``exp(-(2k/(5 pi))^2 x^2)``."""
        return cls(kind="gaussian", width=2.0 * k / (5.0 * math.pi), support=support)

    @classmethod
    def zero(cls):
        return cls(kind="custom", func=np.zeros_like, support=math.inf)

    @classmethod
    def custom(cls, func, support=math.inf):
        return cls(kind="custom", func=func, support=support)

    def raw(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "gaussian":
            return np.exp(-((self.width * x) ** 2))
        return np.asarray(self.func(x))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        val = self.raw(x)
        if math.isinf(self.support):
            return val
        ax = np.abs(x)
        scale = np.where(ax < self.support, 1.0, np.where(ax == self.support, 0.5, 0.0))
        return val * scale

    @property
    def breaks(self):
        """Points where f may jump."""
        if math.isinf(self.support):
            return ()
        return (-self.support, self.support)

    def is_zero(self):
        return self.kind == "custom" and self.func is np.zeros_like
