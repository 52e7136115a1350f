"""Error norms, rate fitting and the experiment drivers built on them."""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import partial
import math
import os

import numpy as np

from .discretization import Grid
from .errors import EmptyFit, EmptyRegion, UnderflowWindow, ZeroReference
from .greens import exact_solution_exp
from .kernels import Family, KernelSpec
from .pml import PmlProfile, choose_sigma0
from .solver import (solve_case1, solve_case1_unmodified_kernel, solve_case2,
                     solve_local_pml_fd)

REFINE = 8
FLOOR_FACTOR = 3.0


def _select(x, region):
    lo, hi = region
    tol = 1e-9 * max(1.0, abs(lo), abs(hi))
    m = (x >= lo - tol) & (x <= hi + tol)
    if m.sum() < 2:
        raise EmptyRegion(f"fewer than two nodes in {region}")
    return m


def discrete_l2(values, x, region):
    """Trapezoidal L2 norm over the nodes inside ``region``."""
    m = _select(np.asarray(x), region)
    v2 = np.abs(np.asarray(values)[m]) ** 2
    return math.sqrt(np.trapezoid(v2, np.asarray(x)[m]))


def discrete_h1_semi(values, x, region):
    """H1 seminorm from forward differences on the cells inside ``region``."""
    m = _select(np.asarray(x), region)
    xs = np.asarray(x)[m]
    g = np.diff(np.asarray(values)[m]) / np.diff(xs)
    return math.sqrt(np.sum(np.diff(xs) * np.abs(g) ** 2))


@dataclass
class ErrorReport:
    e_l2: float
    e_h1: float
    h: float
    params: dict = field(default_factory=dict)


def _interp(x_from, v_from, x_to):
    v = np.asarray(v_from)
    return np.interp(x_to, x_from, v.real) + 1j * np.interp(x_to, x_from, v.imag)


def relative_errors(v1, x1, v2, region, x2=None, refine=REFINE, h=None, params=None):
    """Relative L2 error and H1-seminorm error of v1 against v2 on ``region``.

    Both are divided by the full H1 norm of v2.  v1 is taken as the piecewise
    linear interpolant of its nodal values.  v2 is either nodal values on a
    grid ``x2`` (usually finer) or a callable, which is then sampled on a grid
    ``refine`` times finer than x1.
    """
    x1 = np.asarray(x1)
    m1 = _select(x1, region)
    if callable(v2):
        xs = x1[m1]
        if refine > 1:
            t = np.linspace(0.0, 1.0, refine + 1)[:-1]
            xs = np.append((xs[:-1, None] + np.diff(xs)[:, None] * t).ravel(), xs[-1])
        ref = np.asarray(v2(xs))
    else:
        x2 = x1 if x2 is None else np.asarray(x2)
        m2 = _select(x2, region)
        xs, ref = x2[m2], np.asarray(v2)[m2]
    approx = _interp(x1, v1, xs)
    region = (xs[0], xs[-1])
    norm = math.hypot(discrete_l2(ref, xs, region), discrete_h1_semi(ref, xs, region))
    if norm == 0:
        raise ZeroReference("reference has zero H1 norm")
    diff = approx - ref
    return ErrorReport(e_l2=discrete_l2(diff, xs, region) / norm,
                       e_h1=discrete_h1_semi(diff, xs, region) / norm,
                       h=float(x1[1] - x1[0]), params=dict(params or {}))


@dataclass
class RateFit:
    points: list
    slope: float
    intercept: float
    r_squared: float


def fit_line(xs, ys):
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    A = np.vstack([xs, np.ones_like(xs)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, ys, rcond=None)
    resid = ys - (slope * xs + intercept)
    ss = np.sum((ys - ys.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss if ss > 0 else 1.0
    return float(slope), float(intercept), float(min(max(r2, 0.0), 1.0))


def fit_rate(hs, errors, floor=0.0, plateau_slope=0.5):
    """Least-squares slope of log(error) against log(h).

    Points within FLOOR_FACTOR of ``floor`` are dropped, as are leading
    coarse-mesh points whose local rate is below ``plateau_slope``.
    """
    pts = sorted(zip(hs, errors), reverse=True)
    pts = [(h, e) for h, e in pts if e > FLOOR_FACTOR * floor and e > 0]
    while len(pts) >= 3:
        (h0, e0), (h1, e1) = pts[0], pts[1]
        if math.log(e0 / e1) / math.log(h0 / h1) >= plateau_slope:
            break
        pts = pts[1:]
    if len(pts) < 3:
        raise EmptyFit(f"need at least 3 usable points, have {len(pts)}")
    lx = [math.log(h) for h, _ in pts]
    ly = [math.log(e) for _, e in pts]
    slope, intercept, r2 = fit_line(lx, ly)
    return RateFit(points=list(zip(lx, ly)), slope=slope, intercept=intercept, r_squared=r2)


def local_rates(hs, errs):
    out = [math.nan]
    for i in range(1, len(hs)):
        out.append(math.log(errs[i - 1] / errs[i]) / math.log(hs[i - 1] / hs[i]))
    return out


def _workers():
    try:
        return max(1, int(os.environ.get("NLHELM_THREADS", "1")))
    except ValueError:
        return 1


def parallel_map(fn, items):
    """Map preserving input order; NLHELM_THREADS caps the pool."""
    items = list(items)
    n = min(_workers(), len(items))
    if n <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def solve_config(config, h=None):
    """Run the solve selected by ``config`` at mesh size h."""
    kernel = config.kernel_spec()
    grid = config.grid(h)
    f = config.source()
    case = config.select_case()
    if case == "case1":
        p = config.pml()
        if config.unmodified_kernel:
            return solve_case1_unmodified_kernel(kernel, grid, p, config.k, f)
        return solve_case1(kernel, grid, p, config.k, f)
    s0 = config.sigma0 if isinstance(config.sigma0, float) else 0.0
    return solve_case2(kernel, grid, config.k, f, d=config.d, sigma0=s0, l=config.l)


def reference_solution(config, h_min):
    """Exact solution (exponential kernel) or a fine-mesh discrete reference.

    Returns ``(x, values)`` with x None for a callable reference.
    """
    if config.kernel is Family.EXPONENTIAL:
        f = config.source()
        return None, partial(exact_solution_exp, config.k, config.delta, f)
    h_ref = h_min / 4
    region = (-config.l, config.l)
    d = config.d
    res = solve_config(config, h_ref)
    for _ in range(4):
        # "large enough": double the truncation until the solution on the domain settles
        bigger = config.with_(d=2 * d, sigma0=config.sigma0_value() if
                              config.select_case() == "case1" else config.sigma0)
        res2 = solve_config(bigger, h_ref)
        m1, m2 = _select(res.x, region), _select(res2.x, region)
        change = np.max(np.abs(res.values[m1] - res2.values[m2]))
        res, d, config = res2, 2 * d, bigger
        if change < 1e-8 * np.max(np.abs(res2.values[m2])):
            break
    return res.x, res.values


def error_region(config, margin):
    """Omega shrunk by ``margin`` when the source jumps at its edges."""
    if config.source_support is None or config.source_support >= config.l:
        return (-config.l + margin, config.l - margin)
    return (-config.l, config.l)


def _errors(result, ref, region, params=None):
    x_ref, v_ref = ref
    if x_ref is None:
        return relative_errors(result.values, result.x, v_ref, region, params=params)
    return relative_errors(result.values, result.x, v_ref, region, x2=x_ref, params=params)


def convergence_study(config, h_list):
    """Errors and fitted rates over an h ladder; returns (rows, fit_l2, fit_h1).

    The cut-off source jumps at +-l, so errors are measured on Omega minus
    one coarsest cell at each end; the H1 seminorm of a jump is unbounded.
    """
    h_list = sorted(h_list, reverse=True)
    if len(h_list) < 3:
        raise EmptyFit("a convergence study needs at least 3 mesh sizes")
    region = error_region(config, h_list[0])
    ref = reference_solution(config, h_list[-1])
    reports = parallel_map(lambda h: _errors(solve_config(config, h), ref, region,
                                             config.describe()), h_list)
    el2 = [r.e_l2 for r in reports]
    eh1 = [r.e_h1 for r in reports]
    rows = list(zip(h_list, el2, eh1, local_rates(h_list, el2), local_rates(h_list, eh1)))
    return rows, fit_rate(h_list, el2), fit_rate(h_list, eh1)


@dataclass
class SweepResult:
    rows: list
    c1_l2: float
    c2_l2: float
    c1_h1: float
    c2_h1: float


def _exp_fit(values, errs):
    """Fit log e = log c1 - c2 * value on the pre-floor segment.

    The segment is the leading run of errors above twice the floor (the
    smallest error), closed by the first point that enters the floor band.
    """
    floor = min(errs)
    pts = []
    for v, e in zip(values, errs):
        pts.append((v, e))
        if e <= 2.0 * floor:
            break
    if len(pts) < 2:
        raise EmptyFit("the sweep starts at the floor; no decay to fit")
    slope, intercept, _ = fit_line([p[0] for p in pts], [math.log(p[1]) for p in pts])
    return math.exp(intercept), -slope


def truncation_sweep(config, vary, values, h=None):
    """Case-1 truncation errors while varying sigma0 or the layer thickness d."""
    h = h or config.h
    values = sorted(values)
    if not values:
        raise ValueError("no sweep values")
    region = error_region(config, h)
    ref = reference_solution(config, h)

    def one(v):
        cfg = config.with_(sigma0=float(v)) if vary == "sigma0" else config.with_(d=float(v))
        r = solve_config(cfg.with_(case="case1"), h)
        return _errors(r, ref, region, cfg.describe())

    reports = parallel_map(one, values)
    el2 = [r.e_l2 for r in reports]
    eh1 = [r.e_h1 for r in reports]
    c1a, c2a = _exp_fit(values, el2)
    c1b, c2b = _exp_fit(values, eh1)
    return SweepResult(rows=list(zip(values, el2, eh1)), c1_l2=c1a, c2_l2=c2a,
                       c1_h1=c1b, c2_h1=c2b)


def decay_slope(values, x, window, against=None):
    """Slope of log|u| over the open ``window``, against x or ``against(x)``."""
    x = np.asarray(x)
    lo, hi = window
    m = (x > lo) & (x < hi)
    v = np.abs(np.asarray(values)[m])
    if v.size < 2:
        raise EmptyRegion(f"fewer than two nodes in {window}")
    if np.any(v < 1e-300):
        raise UnderflowWindow("solution underflows inside the fit window")
    t = x[m] if against is None else np.asarray(against(x[m]))
    slope, _, _ = fit_line(t, np.log(v))
    return slope


def delta_convergence_study(config, levels, local_refine=8):
    """Nonlocal PML solutions at delta = h against a fine local FD PML solution."""
    levels = sorted(levels, reverse=True)
    if len(levels) < 3:
        raise EmptyFit("a delta-convergence study needs at least 3 levels")
    k = config.k
    s0 = config.sigma0 if isinstance(config.sigma0, float) else \
        choose_sigma0(k, config.d, config.sigma0[1])
    p = PmlProfile(config.l, config.d, s0)
    f = config.source()
    h_loc = levels[-1] / local_refine
    M = int(round((config.l + config.d) / h_loc))
    local = solve_local_pml_fd(Grid(h=h_loc, N=M + 1, M=M), p, k, f)
    region = error_region(config, levels[0])

    def one(delta):
        kernel = KernelSpec(config.kernel, delta)
        grid = Grid.build(delta, config.l, config.d, kernel)
        r = solve_case1(kernel, grid, p, k, f)
        return relative_errors(r.values, r.x, local.values, region, x2=local.x,
                               params={"delta": delta, "k": k, "sigma0": s0})

    reports = parallel_map(one, levels)
    el2 = [r.e_l2 for r in reports]
    eh1 = [r.e_h1 for r in reports]
    rows = list(zip(levels, el2, eh1, local_rates(levels, el2), local_rates(levels, eh1)))
    return rows, fit_rate(levels, el2), fit_rate(levels, eh1)
