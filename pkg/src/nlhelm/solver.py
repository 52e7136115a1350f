"""Truncated discrete problems and the local finite-difference PML oracle.

All solves pin the nodes ``M <= |n| <= N`` to zero and eliminate them, then
factor the interior block with banded LU (partial pivoting).
"""
from dataclasses import dataclass
from enum import Enum
import warnings

import numpy as np
from scipy.linalg import lapack

from . import pml as pmlmod
from .discretization import BandedComplexMatrix, assemble_nonlocal, assemble_pml
from .dispersion import Regime, solve_ktilde
from .errors import RegimeMismatch, SingularSystem
from .source import SourceFunction  # noqa: F401  (re-exported)

PIVOT_TOL = 1e-14
RESIDUAL_TOL = 1e-10


class Case(str, Enum):
    PML_CASE1 = "case1"
    DIRICHLET_CASE2 = "case2"
    LOCAL_FD = "local"


@dataclass
class SolveResult:
    grid: object
    values: np.ndarray
    case: Case
    residual_norm: float

    @property
    def x(self):
        return self.grid.nodes

    def write_csv(self, path):
        write_solution_csv(path, self.x, self.values)


def write_solution_csv(path, x, values):
    with open(path, "w", newline="\n") as fh:
        fh.write("x,re_u,im_u,abs_u\n")
        for xi, v in zip(x, values):
            fh.write(f"{xi:.17g},{v.real:.17g},{v.imag:.17g},{abs(v):.17g}\n")


def _banded_solve(A, lo, hi, shift, rhs):
    """Solve (A[lo:hi, lo:hi] + diag(shift)) u = rhs; returns (u, residual)."""
    b = A.b
    ab = A.lapack_band(lo, hi, shift)
    scale = np.max(np.abs(ab))
    lu, piv, info = lapack.zgbtrf(ab, b, b)
    pivots = np.abs(lu[2 * b, :])
    if info > 0 or pivots.min() < PIVOT_TOL * scale:
        raise SingularSystem(
            f"pivot {pivots.min():.3g} below {PIVOT_TOL:g} x scale {scale:.3g}; "
            "k^2 is close to a discrete eigenvalue, perturb h or sigma0")
    u, info = lapack.zgbtrs(lu, b, b, rhs.astype(complex), piv)
    if info != 0:
        raise SingularSystem(f"zgbtrs failed with info={info}")
    return u


def _solve_truncated(A, grid, mass, k, f, case):
    """Interior rows: (A - k^2 diag(mass)) u = f(x_n); pinned layers elsewhere."""
    lo, hi = grid.N - grid.M + 1, grid.N + grid.M
    x = grid.nodes
    rhs = np.asarray(f(x[lo:hi]), dtype=complex)
    shift = -(k * k) * mass[lo:hi]
    values = np.zeros(grid.size, dtype=complex)
    if np.any(rhs != 0):
        values[lo:hi] = _banded_solve(A, lo, hi, shift, rhs)
    resid = A.matvec(values)[lo:hi] + shift * values[lo:hi] - rhs
    res = float(np.max(np.abs(resid))) if resid.size else 0.0
    # backward-error style bound: |A| |u| + |f|
    scale = float(np.max(np.abs(A.data[lo:hi]).sum(axis=1) + np.abs(shift))) \
        * float(np.max(np.abs(values), initial=0.0)) + float(np.max(np.abs(rhs), initial=0.0))
    if res > RESIDUAL_TOL * scale:
        raise SingularSystem(f"residual {res:.3g} exceeds {RESIDUAL_TOL:g} x {scale:.3g}")
    return SolveResult(grid=grid, values=values, case=case, residual_norm=res)


def _check_regime(kernel, k, expected):
    try:
        regime = solve_ktilde(kernel, k).regime
    except Exception:  # degenerate k: leave it to the solve
        return
    if regime is not expected:
        warnings.warn(f"k={k} is in the {regime.value} regime; solving anyway",
                      RegimeMismatch, stacklevel=3)


def solve_case1(kernel, grid, pml, k, f, matrix=None):
    """Nonlocal PML problem with the continued kernel (propagating regime)."""
    _check_regime(kernel, k, Regime.PROPAGATING)
    A = matrix if matrix is not None else assemble_pml(kernel, grid, pml)
    mass = pmlmod.omega(pml, grid.nodes)
    return _solve_truncated(A, grid, mass, k, f, Case.PML_CASE1)


def solve_case1_unmodified_kernel(kernel, grid, pml, k, f):
    """Ablation: omega factors kept, kernel left on the real axis."""
    A = assemble_pml(kernel, grid, pml, continued=False)
    mass = pmlmod.omega(pml, grid.nodes)
    return _solve_truncated(A, grid, mass, k, f, Case.PML_CASE1)


def solve_case2(kernel, grid, k, f, d=None, sigma0=0.0, l=None, matrix=None):
    """Plain nonlocal problem truncated by Dirichlet layers (evanescent regime).

    ``sigma0 > 0`` (with ``l``) switches on the layer medium for comparison
    runs; the default keeps omega = 1.
    """
    _check_regime(kernel, k, Regime.EVANESCENT)
    if sigma0 > 0:
        if l is None or d is None:
            raise ValueError("l and d are needed when sigma0 > 0")
        p = pmlmod.PmlProfile(l, d, sigma0)
        A = matrix if matrix is not None else assemble_pml(kernel, grid, p)
        mass = pmlmod.omega(p, grid.nodes)
    else:
        A = matrix if matrix is not None else assemble_nonlocal(kernel, grid)
        mass = np.ones(grid.size)
    return _solve_truncated(A, grid, mass, k, f, Case.DIRICHLET_CASE2)


def local_fd_matrix(grid, pml, ktilde):
    """Tridiagonal conservative FD operator for -(1/omega u')' - k~^2 omega u."""
    h = grid.h
    x = grid.nodes
    inv_left = 1.0 / pmlmod.omega(pml, x - 0.5 * h)
    inv_right = 1.0 / pmlmod.omega(pml, x + 0.5 * h)
    A = BandedComplexMatrix(grid.size, 1)
    A.data[:, 0] = -inv_left / h**2
    A.data[:, 2] = -inv_right / h**2
    A.data[:, 1] = (inv_left + inv_right) / h**2
    A.data[~A._valid()] = 0
    return A


def solve_local_pml_fd(grid, pml, ktilde, f):
    """Local PML oracle with Dirichlet conditions at +-(l + d)."""
    A = local_fd_matrix(grid, pml, ktilde)
    mass = pmlmod.omega(pml, grid.nodes)
    return _solve_truncated(A, grid, mass, ktilde, f, Case.LOCAL_FD)
