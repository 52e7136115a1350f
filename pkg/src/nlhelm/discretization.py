"""Uniform grid and the asymptotically compatible collocation assembly.

For an offset ``j = m - n`` the coefficient is

    a[n, m] = -1/(j h) * integral phi_j(s) s gamma(c - s/2, c + s/2) ds

with ``phi_j`` the hat function centred at ``j h`` and ``c`` the midpoint of
``x_n`` and ``x_m``; the diagonal is minus the sum of the row.  The PML
variant replaces gamma by the continued kernel evaluated at stretched
coordinates times ``omega(x) omega(y)``.
"""
from dataclasses import dataclass
import math

import numpy as np

from . import pml as pmlmod
from .errors import KernelOverflow, QuadratureFailure
from .kernels import eval_rescaled, eval_rescaled_complex
from .quadrature import gauss_legendre

GL_ORDER = 16


@dataclass(frozen=True)
class Grid:
    """Nodes ``x_n = n h`` for ``-N <= n <= N``; ``l + d = M h``."""

    h: float
    N: int
    M: int

    def __post_init__(self):
        if not (self.h > 0 and 0 < self.M < self.N):
            raise ValueError("need h > 0 and 0 < M < N")

    @classmethod
    def build(cls, h, l, d, kernel, extra=0):
        """Grid covering ``[-(l+d), l+d]`` plus a Dirichlet buffer for ``kernel``."""
        M = _as_multiple(l + d, h, "l + d")
        _as_multiple(l, h, "l")
        return cls(h=h, N=M + bandwidth(kernel, h) + extra, M=M)

    @property
    def buffer(self):
        return self.N - self.M

    @property
    def size(self):
        return 2 * self.N + 1

    @property
    def indices(self):
        return np.arange(-self.N, self.N + 1)

    @property
    def nodes(self):
        return self.indices * self.h

    @property
    def interior(self):
        """Boolean mask of the rows -M < n < M."""
        return np.abs(self.indices) < self.M


def _as_multiple(length, h, name):
    ratio = length / h
    n = int(round(ratio))
    if abs(ratio - n) > 1e-9 * max(1.0, ratio) or n <= 0:
        raise ValueError(f"{name} = {length} is not a positive multiple of h = {h}")
    return n


def bandwidth(kernel, h):
    return int(math.ceil(kernel.reach / h)) + 1


def hat(s, m, h):
    return np.maximum(0.0, 1.0 - np.abs(np.asarray(s) - m * h) / h)


class BandedComplexMatrix:
    """Square matrix stored by rows and diagonal offsets.

    ``data[i, b + j]`` holds ``A[i, i + j]``; slots that fall outside the
    matrix are kept at zero.
    """

    def __init__(self, size, b, data=None):
        self.size = size
        self.b = b
        self.data = np.zeros((size, 2 * b + 1), dtype=complex) if data is None else data
        self.offset_values = None

    def _valid(self):
        i = np.arange(self.size)[:, None]
        j = np.arange(-self.b, self.b + 1)[None, :]
        return (i + j >= 0) & (i + j < self.size)

    def set_diagonal_from_rows(self):
        self.data[:, self.b] = 0
        self.data[:, self.b] = -self.data.sum(axis=1)

    def entry(self, i, k):
        j = k - i
        if abs(j) > self.b:
            return 0j
        return self.data[i, self.b + j]

    def to_dense(self):
        A = np.zeros((self.size, self.size), dtype=complex)
        for j in range(-self.b, self.b + 1):
            rows = np.arange(max(0, -j), min(self.size, self.size - j))
            A[rows, rows + j] = self.data[rows, self.b + j]
        return A

    def matvec(self, u):
        u = np.asarray(u)
        pad = np.zeros(self.size + 2 * self.b, dtype=complex)
        pad[self.b:self.b + self.size] = u
        out = np.zeros(self.size, dtype=complex)
        for j in range(-self.b, self.b + 1):
            out += self.data[:, self.b + j] * pad[self.b + j:self.b + j + self.size]
        return out

    def row_sums(self):
        return self.data.sum(axis=1)

    def lapack_band(self, lo, hi, shift=None):
        """LAPACK ``gbtrf`` storage of the square block ``lo <= i, k < hi``.

        ``shift`` (length hi - lo) is added to the diagonal.  Extra ``b``
        leading rows are left for pivoting fill-in.
        """
        b = self.b
        n = hi - lo
        ab = np.zeros((3 * b + 1, n), dtype=complex)
        block = self.data[lo:hi].copy()
        if shift is not None:
            block[:, b] += shift
        rows = np.arange(n)
        for j in range(-b, b + 1):
            cols = rows + j
            ok = (cols >= 0) & (cols < n)
            ab[2 * b - j, cols[ok]] = block[rows[ok], b + j]
        return ab

    def dump_csv(self, path, grid):
        """Write nonzero entries as ``n,m,re,im`` rows."""
        with open(path, "w", newline="\n") as fh:
            fh.write("n,m,re,im\n")
            valid = self._valid()
            for i in range(self.size):
                for jj in np.nonzero(valid[i])[0]:
                    v = self.data[i, jj]
                    if v != 0:
                        fh.write(f"{i - grid.N},{i + jj - self.b - grid.N},{v.real:.17g},{v.imag:.17g}\n")


def _offset_rule(h, delta, b, order):
    """Quadrature nodes/weights over the hat support of every offset 1..b.

    Returns s (b, Q) and the weights already multiplied by phi_j(s) s / (j h).
    """
    t, w = gauss_legendre(order)
    sub = max(1, int(math.ceil(2.0 * h / delta)))
    edges = np.linspace(0.0, 1.0, sub + 1)
    # reference rule on [0, 1] split into `sub` panels
    ref_x = (edges[:-1, None] + 0.5 * (edges[1:] - edges[:-1])[:, None] * (t + 1)).ravel()
    ref_w = (0.5 * (edges[1:] - edges[:-1])[:, None] * w).ravel()
    j = np.arange(1, b + 1, dtype=float)[:, None]
    left = (j - 1 + ref_x) * h
    right = (j + ref_x) * h
    s = np.concatenate([left, right], axis=1)
    phi = np.concatenate([ref_x + 0 * j, 1.0 - ref_x + 0 * j], axis=1)
    wts = np.concatenate([ref_w + 0 * j, ref_w + 0 * j], axis=1) * h
    return s, wts * phi * s / (j * h)


def offset_coefficients(kernel, h, b, order=GL_ORDER, check=True):
    """Off-diagonal coefficients a_j, j = 1..b, of the translation-invariant operator."""
    s, W = _offset_rule(h, kernel.delta, b, order)
    a = -np.sum(W * eval_rescaled(kernel, s), axis=1)
    if check:
        s2, W2 = _offset_rule(h, kernel.delta, b, 2 * order)
        a2 = -np.sum(W2 * eval_rescaled(kernel, s2), axis=1)
        scale = np.max(np.abs(a2))
        bad = np.nonzero(np.abs(a - a2) > 1e-13 * scale)[0]
        if bad.size:
            j = int(bad[0]) + 1
            raise QuadratureFailure(f"offset {j} quadrature not converged", offset=j,
                                    estimate=float(abs(a - a2)[bad[0]]))
    return a


def assemble_nonlocal(kernel, grid, order=GL_ORDER):
    b = bandwidth(kernel, grid.h)
    a = offset_coefficients(kernel, grid.h, b, order)
    A = BandedComplexMatrix(grid.size, b)
    A.data[:, b + 1:] = a[None, :]
    A.data[:, :b] = a[::-1][None, :]
    A.data[~A._valid()] = 0
    A.set_diagonal_from_rows()
    A.offset_values = a
    return A


def assemble_pml(kernel, grid, pml, order=GL_ORDER, continued=True, chunk=None):
    """Assemble the PML-modified operator.

    With ``continued=False`` the real kernel gamma_delta(y - x) is used with
    the omega(x) omega(y) factors kept (the unmodified-kernel ablation).
    Entries whose stencil stays inside the physical domain are copied from
    the plain operator.
    """
    h = grid.h
    A = assemble_nonlocal(kernel, grid, order)
    if pml.sigma0 == 0:
        return A
    b = A.b
    lidx = _as_multiple(pml.l, h, "l")
    s_half, W_half = _offset_rule(h, kernel.delta, b, order)
    js = np.concatenate([-np.arange(b, 0, -1), np.arange(1, b + 1)])
    # negative offsets mirror the positive rule: s -> -s keeps phi_j(s) s / (j h)
    s = np.concatenate([-s_half[::-1], s_half])
    W = np.concatenate([W_half[::-1], W_half])
    cols = np.concatenate([np.arange(0, b), np.arange(b + 1, 2 * b + 1)])

    n_all = grid.indices
    rows = np.nonzero(np.abs(n_all) + b >= lidx)[0]
    half_slope = 0.5 * pml.slope
    if chunk is None:
        chunk = max(1, int(2e6 // s.size))
    valid = A._valid()
    for start in range(0, rows.size, chunk):
        ri = rows[start:start + chunk]
        n = n_all[ri].astype(float)
        c = (n[:, None] + 0.5 * js[None, :])[:, :, None] * h
        x = c - 0.5 * s
        y = c + 0.5 * s
        ex = np.maximum(np.abs(x) - pml.l, 0.0)
        ey = np.maximum(np.abs(y) - pml.l, 0.0)
        if continued:
            im = half_slope * (np.sign(x) * ex * ex - np.sign(y) * ey * ey)
            with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                K = eval_rescaled_complex(kernel, -s + 1j * im)
        else:
            K = eval_rescaled(kernel, s)
        with np.errstate(over="ignore", invalid="ignore"):
            vals = -np.sum(W * K * (1 + 1j * pml.slope * ex) * (1 + 1j * pml.slope * ey), axis=2)
        if not np.all(np.isfinite(vals)):
            raise KernelOverflow("continued kernel overflows in the layer; lower sigma0 or d")
        m = n[:, None] + js[None, :]
        inside = (np.abs(n)[:, None] < lidx) & (np.abs(m) < lidx)
        block = A.data[ri][:, cols]
        block = np.where(inside, block, vals)
        A.data[ri[:, None], cols[None, :]] = block
    A.data[~valid] = 0
    A.set_diagonal_from_rows()
    return A
