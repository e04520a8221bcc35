"""Finite-difference Laplacian on the Heisenberg quotient.

Grid: ``x_j = i_j / N`` (``0 <= i_j < N``), ``y_j = k_j / N``
(``0 <= k_j < N r_j``), ``t = l / N`` (``0 <= l < N``).  Node order is
``(i_1..i_d, k_1..k_d, l)`` in C order.

Gluing follows the left quotient ``(x, y, t) ~ (x + a, y + b, t + a.y + c)``:
stepping from ``i_j = N - 1`` in the ``+x_j`` direction lands on
``(0, k, l - k_j)``, and ``y_j``, ``t`` are plainly periodic.  Because ``y_j``
and ``t`` share the spacing ``1/N`` the twist always lands on a node.

Stencil.  With forward differences ``D_x``, ``D_y``, ``D_t`` (twisted wrap
included in ``D_x``) and ``Y_h = D_y + diag(x) D_t``:

    Delta_h = sum_j D_{x_j}^* D_{x_j} + s^2 (Y_h^* Y_h + Y_h Y_h^*) / 2
              + s^{-2d} D_t^* D_t

``D^* D`` is the usual centered second difference, so the ``X`` and ``T``
parts are the 3-point stencils.  The symmetrized ``Y`` part is second-order
accurate and positive semidefinite.  Symmetrizing a centered first difference
instead leaves a checkerboard kernel (the centered ``Y_h`` annihilates
alternating-sign modes), which is why the one-sided factor is used.

The operator commutes with ``t``-translations, so a Fourier mode
``exp(2 i pi m l / N)`` in ``t`` reduces it to a Hermitian block on the
``(x, y)`` grid with phase ``exp(-2 i pi m k_j / N)`` on the twisted edges.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp

from ..linalg import SymmetricOperator, inertia_count, shift_invert_lowest
from .model import HeisenbergModel
from .spectrum import yamabe_shift


class GridDivisibilityError(ValueError):
    """Grid cannot represent the t-twist on nodes."""


def _shape(model: HeisenbergModel, n: int, with_t: bool) -> tuple[int, ...]:
    if n < 8:
        raise GridDivisibilityError("need at least 8 nodes per unit length")
    for j, rj in enumerate(model.r):
        if (n * rj) % n:
            raise GridDivisibilityError(f"axis y_{j + 1}: N r_j must be a multiple of N")
    shape = (n,) * model.d + tuple(n * rj for rj in model.r)
    return shape + ((n,) if with_t else ())


def _difference_operators(model: HeisenbergModel, n: int, mode):
    """Forward differences ``(D_x list, D_y list, D_t, x coordinate per node)``.

    ``mode is None`` builds the real operators on the full grid; an integer
    builds the reduced operators for the ``t``-Fourier mode ``mode``.
    """
    d = model.d
    h = 1.0 / n
    full = mode is None
    shape = _shape(model, n, full)
    size = int(np.prod(shape))
    idx = np.arange(size).reshape(shape)
    coords = np.indices(shape)
    dtype = float if full else complex
    eye = sp.identity(size, dtype=dtype, format="csr")

    def shift_matrix(target, phase=None):
        data = np.ones(size, dtype=dtype) if phase is None else phase.ravel().astype(dtype)
        return sp.csr_matrix((data, (idx.ravel(), target.ravel())), shape=(size, size))

    dx = []
    for j in range(d):
        ii = coords[j]
        wrap = ii == n - 1
        tgt_coords = [c.copy() for c in coords]
        tgt_coords[j] = np.where(wrap, 0, ii + 1)
        k = coords[d + j]
        if full:
            tgt_coords[2 * d] = np.where(wrap, (coords[2 * d] - k) % n, coords[2 * d])
            phase = None
        else:
            phase = np.where(wrap, np.exp(-2j * math.pi * mode * k / n), 1.0)
        target = idx[tuple(tgt_coords)]
        dx.append((shift_matrix(target, phase) - eye) / h)
    dy = []
    for j in range(d):
        tgt_coords = [c.copy() for c in coords]
        tgt_coords[d + j] = (coords[d + j] + 1) % shape[d + j]
        dy.append((shift_matrix(idx[tuple(tgt_coords)]) - eye) / h)
    if full:
        tgt_coords = [c.copy() for c in coords]
        tgt_coords[2 * d] = (coords[2 * d] + 1) % n
        dt = (shift_matrix(idx[tuple(tgt_coords)]) - eye) / h
    else:
        dt = eye * ((np.exp(2j * math.pi * mode / n) - 1.0) / h)
    xcoord = [coords[j].ravel() * h for j in range(d)]
    return dx, dy, dt, xcoord


def _assemble(model: HeisenbergModel, n: int, mode):
    d, s = model.d, model.s
    dx, dy, dt, xs = _difference_operators(model, n, mode)
    op = s ** (-2 * d) * (dt.conj().T @ dt)
    for j in range(d):
        op = op + dx[j].conj().T @ dx[j]
        yh = dy[j] + sp.diags(xs[j]) @ dt
        op = op + 0.5 * s * s * (yh.conj().T @ yh + yh @ yh.conj().T)
    op = sp.csr_matrix(op)
    # remove rounding asymmetry before the exact symmetry check
    op = sp.csr_matrix(0.5 * (op + op.conj().T))
    op.eliminate_zeros()
    return op


def twisted_grid_laplacian(model: HeisenbergModel, n: int) -> SymmetricOperator:
    """Sparse real grid Laplacian on the full ``(x, y, t)`` grid (uniform measure)."""
    return SymmetricOperator(_assemble(model, n, None))


def twisted_grid_block(model: HeisenbergModel, n: int, mode: int) -> SymmetricOperator:
    """Hermitian block of the grid Laplacian for ``t``-Fourier mode ``mode``."""
    return SymmetricOperator(_assemble(model, n, int(mode)))


def mode_floor(model: HeisenbergModel, n: int, mode: int) -> float:
    """Lower bound ``s^{-2d} (4/h^2) sin^2(pi m / N)`` for every eigenvalue of block ``m``."""
    return model.s ** (-2 * model.d) * 4.0 * n * n * math.sin(math.pi * mode / n) ** 2


def twisted_grid_lowest(model: HeisenbergModel, n: int, count: int,
                        shift: float = 0.0) -> np.ndarray:
    """Lowest ``count`` eigenvalues of ``Delta_h + shift`` with multiplicity.

    Blocks are visited in order of ``|m|``; a block is skipped once its floor
    exceeds the current ``count``-th value.  Each block is solved by Lanczos
    with shift-invert below its spectrum.
    """
    found: list[float] = []
    m = 0
    while True:
        floor = mode_floor(model, n, m) + shift
        if len(found) >= count and floor > sorted(found)[count - 1]:
            break
        if m > n // 2:
            break
        modes = [m] if m in (0, n - m) else [m, -m]
        for mm in modes:
            block = twisted_grid_block(model, n, mm)
            if shift:
                block = block.shifted(shift)
            k = min(count + 2, block.dim - 1)
            res = shift_invert_lowest(block, k, sigma=floor - 1.0, tol=1e-9)
            found.extend(res.eigenvalues.tolist())
        m += 1
    return np.sort(np.array(found))[:count]


def twisted_grid_yamabe_inertia(model: HeisenbergModel, n: int) -> tuple[int, int, int]:
    """Inertia of the grid Yamabe operator ``Delta_h + (n-2)/(4(n-1)) R``.

    Summed over the ``t``-Fourier blocks (a unitary block diagonalization);
    blocks whose floor is above ``-shift`` are positive definite and counted
    without factorization.
    """
    shift = yamabe_shift(model)
    neg = zero = pos = 0
    for m in range(-(n // 2) + (1 if n % 2 == 0 else 0), n // 2 + 1):
        size = int(np.prod(_shape(model, n, False)))
        if mode_floor(model, n, m) + shift > 0:
            pos += size
            continue
        block = twisted_grid_block(model, n, m).shifted(shift)
        a, b, c = inertia_count(block, 0.0)
        neg, zero, pos = neg + a, zero + b, pos + c
    return neg, zero, pos
