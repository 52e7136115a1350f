"""Dispersion function mu and the modified wavenumber k~ solving mu(k~) = k^2."""
from dataclasses import dataclass
from enum import Enum
import cmath
import math

import numpy as np

from .errors import DegenerateK, NoRootFound, QuadratureFailure
from .kernels import Family, eval_parent, effective_radius
from .quadrature import adaptive, composite


class Regime(str, Enum):
    PROPAGATING = "propagating"
    EVANESCENT = "evanescent"


@dataclass(frozen=True)
class DispersionResult:
    k: float
    ktilde: complex
    k0: float
    regime: Regime
    residual: float


def mu_closed(kernel, ktilde):
    """Closed-form mu, or None for a family without one."""
    d = kernel.delta
    kt = np.asarray(ktilde, dtype=complex)
    if kernel.family is Family.EXPONENTIAL:
        return kt**2 / (1.0 + (d * kt) ** 2)
    if kernel.family is Family.GAUSSIAN:
        return (4.0 / d**2) * -np.expm1(-((d * kt) ** 2) / 4.0)
    return None


def _integration_radius(kernel, growth):
    """Radius past which parent(s) * exp(growth * s) is below the support tolerance."""
    eps = kernel.support_tolerance
    r = effective_radius(kernel)
    if growth == 0:
        return r

    def weighted(s):
        return float(eval_parent(kernel, s)) * math.exp(min(growth * s, 700.0))

    for _ in range(12):
        if weighted(r) < eps and weighted(2 * r) < weighted(r):
            return r
        r *= 2.0
    raise QuadratureFailure(
        f"integrand of mu grows like exp({growth:.3g} s); the defining integral diverges",
        estimate=math.inf,
    )


def mu_quadrature(kernel, ktilde, tol=1e-14):
    """mu(k~) by quadrature of its defining integral.

    The integrand is even in s, so only the half line is integrated, and
    ``1 - cos`` is written as ``2 sin^2`` to avoid cancellation at small k~.
    """
    kt = complex(ktilde)
    if kt == 0:
        return 0j
    d = kernel.delta
    q = kt * d
    r = _integration_radius(kernel, abs(q.imag))

    def integrand(s):
        return 2.0 * np.sin(0.5 * q * s) ** 2 * eval_parent(kernel, s)

    panels = max(4, int(math.ceil(r * (abs(q.real) + 1.0) / 4.0)))
    val, err = adaptive(integrand, 0.0, r, tol=tol, panels=panels)
    if err > 1e-9 * max(1.0, abs(val)):
        raise QuadratureFailure("mu quadrature did not converge", estimate=err)
    return complex(2.0 * val / d**2)


def mu(kernel, ktilde, method="auto"):
    """Dispersion function; ``method`` is 'auto', 'closed' or 'quad'."""
    if method in ("auto", "closed"):
        closed = mu_closed(kernel, ktilde)
        if closed is not None:
            return complex(closed) if np.ndim(closed) == 0 else closed
        if method == "closed":
            raise ValueError(f"no closed form for {kernel.family}")
    if np.ndim(ktilde):
        return np.array([mu_quadrature(kernel, kt) for kt in np.ravel(ktilde)]).reshape(
            np.shape(ktilde))
    return mu_quadrature(kernel, ktilde)


def _mu_prime_quadrature(kernel, ktilde):
    d = kernel.delta
    q = complex(ktilde) * d
    r = _integration_radius(kernel, abs(q.imag))
    panels = max(8, int(math.ceil(r * (abs(q.real) + 1.0) / 2.0)))
    val = composite(lambda s: s * np.sin(q * s) * eval_parent(kernel, s), 0.0, r,
                    panels=panels)
    return complex(2.0 * val / d)


def _kernel_mass(kernel):
    r = effective_radius(kernel)
    return 2.0 * float(composite(lambda s: eval_parent(kernel, s), 0.0, r, panels=64))


def cutoff_k0(kernel, method="auto"):
    d = kernel.delta
    if method == "auto":
        if kernel.family is Family.EXPONENTIAL:
            return 1.0 / d
        if kernel.family is Family.GAUSSIAN:
            return 2.0 / d
    # the supremum may only be approached as k~ -> inf, where mu -> mass / delta^2
    best = _kernel_mass(kernel) / d**2
    grid = np.geomspace(1e-3, 1e3, 241) / d
    vals = np.array([mu_quadrature(kernel, kt).real for kt in grid])
    i = int(np.argmax(vals))
    if 0 < i < len(grid) - 1 and vals[i] > best:
        a, b = grid[i - 1], grid[i + 1]
        g = (math.sqrt(5) - 1) / 2
        for _ in range(80):
            c, e = b - g * (b - a), a + g * (b - a)
            if mu_quadrature(kernel, c).real > mu_quadrature(kernel, e).real:
                b = e
            else:
                a = c
        best = max(best, mu_quadrature(kernel, 0.5 * (a + b)).real)
    return math.sqrt(max(best, vals.max()))


def _admissible(kt):
    kt = complex(kt)
    if kt.imag < 0 or (kt.imag == 0 and kt.real < 0):
        kt = -kt
    return kt


def _closed_root(kernel, k):
    d = kernel.delta
    if kernel.family is Family.EXPONENTIAL:
        t = (d * k) ** 2
        if t < 1:
            return complex(k / math.sqrt(1.0 - t))
        return 1j * k / math.sqrt(t - 1.0)
    if kernel.family is Family.GAUSSIAN:
        arg = 1.0 - (k * d) ** 2 / 4.0
        if arg > 0:
            return complex((2.0 / d) * math.sqrt(-math.log(arg)))
        return _admissible((2.0 / d) * cmath.sqrt(-cmath.log(complex(arg))))
    return None


def _bisect_real(kernel, k, k0):
    target = k * k
    lo = 0.0
    hi = max(k, 1e-12)
    while mu_quadrature(kernel, hi).real < target:
        lo, hi = hi, 2.0 * hi
        if hi > 1e8 / kernel.delta:
            raise NoRootFound(f"no real root below {hi:.3g} for k={k}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mu_quadrature(kernel, mid).real < target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 4e-16 * hi:
            break
    return complex(0.5 * (lo + hi))


def _newton_complex(kernel, k, k0, max_iter=60, tol=1e-12):
    target = k * k
    ratio = complex(1.0 - (k / k0) ** 2)
    kt = _admissible(k0 * cmath.sqrt(-cmath.log(ratio)))
    res = mu_quadrature(kernel, kt) - target
    for _ in range(max_iter):
        if abs(res) <= tol * target:
            return _admissible(kt)
        step = res / _mu_prime_quadrature(kernel, kt)
        for _ in range(40):
            trial = kt - step
            try:
                trial_res = mu_quadrature(kernel, trial) - target
            except QuadratureFailure:
                trial_res = None
            if trial_res is not None and abs(trial_res) < abs(res):
                break
            step *= 0.5
        else:
            break
        kt, res = trial, trial_res
    if abs(res) <= tol * target:
        return _admissible(kt)
    raise NoRootFound(f"complex Newton did not converge for k={k} (|res|={abs(res):.3g})")


def solve_ktilde(kernel, k, method="auto"):
    """Admissible root of mu(k~) = k^2: real positive, or Im(k~) > 0."""
    if not k > 0:
        raise ValueError("k must be positive")
    k0 = cutoff_k0(kernel, method)
    if abs(k - k0) <= 1e-12 * k0:
        raise DegenerateK(f"k={k} sits on the cutoff k0={k0}")
    regime = Regime.PROPAGATING if k < k0 else Regime.EVANESCENT
    kt = _closed_root(kernel, k) if method == "auto" else None
    if kt is None:
        kt = _bisect_real(kernel, k, k0) if regime is Regime.PROPAGATING \
            else _newton_complex(kernel, k, k0)
    resid = abs(mu(kernel, kt, method="auto" if method == "auto" else "quad") - k * k)
    return DispersionResult(k=k, ktilde=kt, k0=k0, regime=regime, residual=resid)
