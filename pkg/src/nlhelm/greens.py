"""Reference solutions built from Green's functions.

``green_free`` is the outgoing Green's function of ``-d^2/dx^2 - k~^2``.
For the exponential kernel the nonlocal Green's function is a rescaled copy
of it plus a weighted point mass, which gives ``exact_solution_exp``.
"""
from dataclasses import dataclass, field
import math

import numpy as np
from scipy import integrate
from scipy.special import erfcx

from .dispersion import solve_ktilde
from .errors import NearSingularDispersion, OutOfDomain
from .kernels import Family, KernelSpec, eval_parent, eval_rescaled, effective_radius
from .quadrature import composite, panel_nodes


@dataclass(frozen=True)
class GreenFree:
    ktilde: complex
    x0: float = 0.0

    def __call__(self, x):
        return green_free(self.ktilde, self.x0, x)


def green_free(ktilde, x0, x):
    kt = complex(ktilde)
    return (0.5j / kt) * np.exp(1j * kt * np.abs(np.asarray(x, dtype=float) - x0))


def exp_ktilde(k, delta):
    t = 1.0 - (delta * k) ** 2
    if abs(t) < 1e-10:
        raise NearSingularDispersion(f"delta*k = {delta * k} is too close to 1")
    return complex(k / math.sqrt(t)) if t > 0 else 1j * k / math.sqrt(-t)


@dataclass(frozen=True)
class GreenNonlocalExp:
    """Green's function of the nonlocal operator with the exponential kernel."""

    k: float
    delta: float
    regular_amplitude: complex = field(init=False)
    dirac_weight: complex = field(init=False)
    ktilde: complex = field(init=False)

    def __post_init__(self):
        t = 1.0 - (self.delta * self.k) ** 2
        kt = exp_ktilde(self.k, self.delta)
        object.__setattr__(self, "regular_amplitude", 1.0 / t**2)
        object.__setattr__(self, "dirac_weight", self.delta**2 / t)
        object.__setattr__(self, "ktilde", kt)

    def regular(self, x0, x):
        return self.regular_amplitude * green_free(self.ktilde, x0, x)


def _gauss_half(kt, a, x, p, q, sign):
    """exp(-i s k x) * integral_p^q exp(i s k y - a^2 y^2) dy for s = sign.

    Uses erfc through the scaled erfcx so that no intermediate overflows.
    Arrays x, p, q broadcast; intervals with p >= q contribute zero.
    """
    c = math.sqrt(math.pi) / (2.0 * a)
    kk = -sign * kt
    b = kk / (2.0 * a * a)
    empty = p >= q
    q = np.where(empty, p, q)

    def term(y):
        z = a * (y + 1j * b)
        neg = z.real < 0
        # exp(-i kk (y - x) - a^2 y^2) multiplies erfcx(+-z)
        expo = np.exp(-1j * kk * (y - x) - (a * y) ** 2)
        val = np.where(neg, -expo * erfcx(np.where(neg, -z, 0)), expo * erfcx(np.where(neg, 0, z)))
        return val, neg

    tp, negp = term(p)
    tq, negq = term(q)
    out = c * (tp - tq)
    jump = negp.astype(int) - negq.astype(int)
    if np.any(jump):
        const = 2.0 * np.exp(1j * kk * x - (a * b) ** 2)
        out = out + c * np.where(jump != 0, jump * const, 0)
    return np.where(empty, 0, out)


def convolve_green(ktilde, source, x, method="auto"):
    """Integral of G_x(y) f(y) over the support of f.

    ``method='closed'`` (Gaussian sources only) uses erf identities;
    ``'quad'`` uses adaptive quadrature split at y = x.
    """
    x = np.asarray(x, dtype=float)
    if method == "auto":
        method = "closed" if source.kind == "gaussian" else "quad"
    if method == "closed":
        a = source.width
        half = source.support if math.isfinite(source.support) else math.sqrt(745.0) / a
        kt = complex(ktilde)
        lo = np.maximum(x, -half)
        hi = np.minimum(x, half)
        left = _gauss_half(kt, a, x, np.full_like(x, -half), hi, sign=-1)
        right = _gauss_half(kt, a, x, lo, np.full_like(x, half), sign=+1)
        return (0.5j / kt) * (left + right)
    return np.vectorize(lambda xi: _convolve_quad(ktilde, source, xi), otypes=[complex])(x)


def _convolve_quad(ktilde, source, x, tol=1e-12):
    half = source.support
    if not math.isfinite(half):
        half = math.sqrt(745.0) / source.width if source.width else 60.0
    cuts = sorted({-half, half, min(max(x, -half), half)})
    total = 0j
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        for part in (np.real, np.imag):
            f = lambda y, part=part: float(part(green_free(ktilde, x, y) * source(y)))
            val, _ = integrate.quad(f, lo, hi, epsabs=tol, epsrel=1e-12, limit=400)
            total += val if part is np.real else 1j * val
    return total


def exact_solution_exp(k, delta, source, x, method="auto"):
    """Whole-line solution of the nonlocal problem with the exponential kernel."""
    g = GreenNonlocalExp(k, delta)
    x = np.asarray(x, dtype=float)
    return g.regular_amplitude * convolve_green(g.ktilde, source, x, method) \
        + g.dirac_weight * source(x)


def local_from_nonlocal(u_values, f_values, k, delta):
    """Solution of the local problem at wavenumber k~ recovered from the nonlocal one."""
    t = 1.0 - (delta * k) ** 2
    if abs(t) < 1e-10:
        raise NearSingularDispersion(f"delta*k = {delta * k} is too close to 1")
    return t * t * np.asarray(u_values) - delta**2 * t * np.asarray(f_values)


def _inner_nodes(lo, hi, panels):
    """Gauss nodes for integrals over [lo_i, hi] with a shared reference rule."""
    xi, wi = panel_nodes(np.linspace(-1.0, 1.0, panels + 1), 16)
    half = 0.5 * (hi - lo)[:, None]
    s = lo[:, None] + half * (xi + 1.0)
    return s, half * wi


def weight_w2(kernel, ktilde, t, panels=48):
    """w2(t) = -1/(delta^2 k~) * int_{t/delta}^{R} sin(k~(t - delta s)) gamma1(s) ds."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    d = kernel.delta
    r = effective_radius(kernel)
    lo = np.minimum(t / d, r)
    s, w = _inner_nodes(lo, np.full_like(lo, r), panels)
    vals = np.sin(ktilde * (t[:, None] - d * s)) * eval_parent(kernel, s)
    out = -np.sum(w * vals, axis=1) / (d * d * ktilde)
    if np.any(lo < 0):
        neg = lo < 0
        out[neg] = _w_split(kernel, ktilde, t[neg], upper=True, panels=panels)
    return out


def weight_w1(kernel, ktilde, t, panels=48):
    """w1(t) = 1/(delta^2 k~) * int_{-R}^{t/delta} sin(k~(t - delta s)) gamma1(s) ds."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    d = kernel.delta
    r = effective_radius(kernel)
    hi = np.maximum(t / d, -r)
    s, w = _inner_nodes(np.full_like(hi, -r), hi, panels)
    vals = np.sin(ktilde * (t[:, None] - d * s)) * eval_parent(kernel, s)
    out = np.sum(w * vals, axis=1) / (d * d * ktilde)
    if np.any(hi > 0):
        pos = hi > 0
        out[pos] = _w_split(kernel, ktilde, t[pos], upper=False, panels=panels)
    return out


def _w_split(kernel, ktilde, t, upper, panels):
    """Same integrals when the range straddles the parent's kink at s = 0."""
    d = kernel.delta
    r = effective_radius(kernel)
    out = np.empty(len(t), dtype=complex)
    for i, ti in enumerate(t):
        f = lambda s: np.sin(ktilde * (ti - d * s)) * eval_parent(kernel, s)
        if upper:
            out[i] = -composite(f, ti / d, r, breaks=(0.0,), panels=panels) / (d * d * ktilde)
        else:
            out[i] = composite(f, -r, ti / d, breaks=(0.0,), panels=panels) / (d * d * ktilde)
    return out


class WeightFunction:
    """The averaging weight kappa: w1 on t < 0 and w2 on t > 0.

    A uniform tabulation is kept for export; evaluation is by quadrature.
    """

    def __init__(self, kernel, ktilde, samples=2001):
        self.kernel = kernel
        self.ktilde = complex(ktilde)
        self.reach = kernel.reach
        t = np.linspace(-self.reach, self.reach, samples)
        self.tabulation = (t, self(t))

    def __call__(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.zeros(t.shape, dtype=complex)
        neg = t < 0
        if np.any(neg):
            out[neg] = weight_w1(self.kernel, self.ktilde, t[neg])
        if np.any(~neg):
            out[~neg] = weight_w2(self.kernel, self.ktilde, t[~neg])
        return out

    def closed_form_exp(self, k, t):
        """Closed form valid for the exponential kernel."""
        d = self.kernel.delta
        return (1.0 - (d * k) ** 2) / (2.0 * d) * np.exp(-np.abs(t) / d)


def weighted_average(u, kappa, x, breaks=(), grid=None, panels=64):
    """u^w(x) = integral of u(t + x) kappa(t) over the kernel window.

    ``u`` is a callable, or an array of nodal values on ``grid`` (a Grid),
    in which case it is interpolated linearly and the window must stay on
    the grid.  ``breaks`` lists points in x where u may jump.
    """
    reach = kappa.reach
    if not callable(u):
        if grid is None:
            raise ValueError("grid is required for nodal values")
        xs = grid.nodes
        if x - reach < xs[0] - 1e-12 or x + reach > xs[-1] + 1e-12:
            raise OutOfDomain(f"averaging window around {x} leaves the grid")
        vals = np.asarray(u)
        u = lambda y: np.interp(y, xs, vals.real) + 1j * np.interp(y, xs, vals.imag)
    tb = [0.0] + [b - x for b in breaks]
    return complex(composite(lambda t: u(t + x) * kappa(t), -reach, reach, breaks=tb,
                             panels=panels))


def nonlocal_apply(kernel, u, x, breaks=(), panels=64):
    """L_delta u(x) by dense quadrature over the truncated kernel window."""
    reach = kernel.reach
    ux = u(np.array([x]))[0]
    yb = [x] + list(breaks)
    f = lambda y: (ux - u(y)) * eval_rescaled(kernel, y - x)
    return complex(composite(f, x - reach, x + reach, breaks=yb, panels=panels))
