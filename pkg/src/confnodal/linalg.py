"""Symmetric linear algebra: dense eigensolvers, Lanczos, inertia counts.

Every operator here is self-adjoint in a (possibly weighted) inner product
``<u, v> = sum(conj(u) * v * w)``.  Weighted problems are reduced to the
symmetric similarity transform ``W^{1/2} A W^{-1/2}``.

Two backends are offered for the dense kernels.  ``"native"`` runs the
Householder/QL and Bunch-Kaufman code in this module.  ``"lapack"`` hands the
same factorizations to LAPACK via scipy.  The native eigensolver is practical
up to a few thousand rows; the LAPACK backend has no limit beyond memory and is
the default.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

ArrayLike = Union[np.ndarray, sp.spmatrix, sp.sparray]

#: Largest dimension accepted by :func:`eigh_dense` with the native backend.
NATIVE_EIGH_LIMIT = 6000
#: Largest dimension accepted by :func:`eigh_dense` with the LAPACK backend.
LAPACK_EIGH_LIMIT = 20000


class NotSymmetricError(ValueError):
    """Raised when an operator fails the symmetry check.

    ``pair`` holds the ``(i, j)`` entry with the largest asymmetry.
    """

    def __init__(self, pair: tuple[int, int], residual: float, scale: float):
        self.pair = pair
        self.residual = residual
        self.scale = scale
        super().__init__(
            f"operator is not symmetric: entries {pair} and {pair[::-1]} differ "
            f"by {residual:.3e} (norm {scale:.3e})"
        )


class FactorizationBreakdown(ArithmeticError):
    """Raised when a pivoted factorization produces a non-finite pivot."""

    def __init__(self, step: int, detail: str = ""):
        self.step = step
        super().__init__(f"LDL^T factorization broke down at pivot step {step}. {detail}".strip())


@dataclass(frozen=True)
class SymmetricOperator:
    """A real symmetric or complex Hermitian operator on ``C^dim``.

    ``matrix`` is a dense square array or a scipy sparse matrix.  When
    ``weights`` is given the operator is self-adjoint in the weighted inner
    product, i.e. ``diag(weights) @ matrix`` is Hermitian.
    """

    matrix: ArrayLike
    weights: Optional[np.ndarray] = None
    check: bool = field(default=True, compare=False)

    def __post_init__(self):
        m = self.matrix
        if sp.issparse(m):
            m = sp.csr_matrix(m)
            object.__setattr__(self, "matrix", m)
        else:
            m = np.asarray(m)
            object.__setattr__(self, "matrix", m)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise ValueError(f"expected a nonempty square matrix, got shape {m.shape}")
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float).ravel()
            if w.shape[0] != m.shape[0]:
                raise ValueError("weight vector length does not match dimension")
            if not np.all(w > 0) or not np.all(np.isfinite(w)):
                raise ValueError("weights must be finite and strictly positive")
            object.__setattr__(self, "weights", w)
        if self.check:
            check_symmetric(self.symmetric_matrix(), tol=1e-12)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.matrix)

    @property
    def dtype(self):
        return self.matrix.dtype

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return self.matrix @ x

    def inner(self, u: np.ndarray, v: np.ndarray) -> complex:
        """Inner product in the declared (possibly weighted) metric."""
        if self.weights is None:
            return np.vdot(u, v)
        return np.vdot(u, self.weights * v)

    def norm1(self) -> float:
        """Maximum absolute column sum of the symmetrized matrix."""
        s = self.symmetric_matrix()
        if sp.issparse(s):
            return float(abs(s).sum(axis=0).max())
        return float(np.abs(s).sum(axis=0).max())

    def zero_tolerance(self) -> float:
        """``1e-8 * (1 + ||A||_1)``: eigenvalues below this count as zero."""
        return 1e-8 * (1.0 + self.norm1())

    def symmetric_matrix(self) -> ArrayLike:
        """``W^{1/2} A W^{-1/2}``, or ``A`` itself when unweighted."""
        if self.weights is None:
            return self.matrix
        r = np.sqrt(self.weights)
        if self.is_sparse:
            return sp.csr_matrix(sp.diags(r) @ self.matrix @ sp.diags(1.0 / r))
        return (r[:, None] * self.matrix) / r[None, :]

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray() if self.is_sparse else np.array(self.matrix)

    def shifted(self, c: float) -> "SymmetricOperator":
        """Return ``A + c I`` with the same weights."""
        if self.is_sparse:
            m = self.matrix + c * sp.identity(self.dim, format="csr")
        else:
            m = self.matrix + c * np.eye(self.dim)
        return SymmetricOperator(m, self.weights, check=False)

    def from_symmetric(self, y: np.ndarray) -> np.ndarray:
        """Map vectors of the symmetrized problem back to the original basis."""
        if self.weights is None:
            return y
        r = 1.0 / np.sqrt(self.weights)
        return r[:, None] * y if y.ndim == 2 else r * y


@dataclass
class EigenResult:
    """Eigenpairs sorted ascending, with residual norms.

    ``eigenvectors[:, i]`` pairs with ``eigenvalues[i]``.  Vectors are
    orthonormal in the operator's declared inner product.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residuals: np.ndarray
    converged: bool = True
    iterations: int = 0


def check_symmetric(m: ArrayLike, tol: float = 1e-12) -> None:
    """Raise :class:`NotSymmetricError` if ``m`` is not Hermitian to ``tol*||m||``."""
    if sp.issparse(m):
        diff = sp.csr_matrix(m - m.conj().T)
        scale = float(abs(m).max()) if m.nnz else 0.0
        if diff.nnz == 0:
            return
        diff = diff.tocoo()
        k = int(np.argmax(np.abs(diff.data)))
        worst = float(abs(diff.data[k]))
        pair = (int(diff.row[k]), int(diff.col[k]))
    else:
        diff = m - m.conj().T
        scale = float(np.abs(m).max())
        flat = int(np.argmax(np.abs(diff)))
        worst = float(np.abs(diff).flat[flat])
        pair = tuple(int(i) for i in np.unravel_index(flat, m.shape))
    if worst > tol * max(scale, np.finfo(float).tiny):
        raise NotSymmetricError(pair, worst, scale)


def _as_operator(a) -> SymmetricOperator:
    return a if isinstance(a, SymmetricOperator) else SymmetricOperator(a)


# ---------------------------------------------------------------------------
# Dense eigensolver
# ---------------------------------------------------------------------------

def householder_tridiagonal(a: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Reduce a real symmetric matrix to tridiagonal form.

    Returns ``(diag, offdiag, q)`` with ``q.T @ a @ q`` tridiagonal.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    q = np.eye(n)
    for k in range(n - 2):
        x = a[k + 1:, k]
        sigma = np.linalg.norm(x)
        if sigma == 0.0:
            continue
        alpha = -np.copysign(sigma, x[0])
        v = x.copy()
        v[0] -= alpha
        vnorm = np.linalg.norm(v)
        if vnorm == 0.0:
            continue
        v /= vnorm
        sub = a[k + 1:, k + 1:]
        p = sub @ v
        w = p - (v @ p) * v
        sub -= 2.0 * (np.outer(v, w) + np.outer(w, v))
        a[k + 1, k] = a[k, k + 1] = alpha
        a[k + 2:, k] = 0.0
        a[k, k + 2:] = 0.0
        q[:, k + 1:] -= 2.0 * np.outer(q[:, k + 1:] @ v, v)
    return np.diag(a).copy(), np.diag(a, -1).copy(), q


def tridiagonal_ql(d: np.ndarray, e: np.ndarray, z: Optional[np.ndarray] = None,
                   max_sweeps: int = 60) -> tuple[np.ndarray, np.ndarray]:
    """Implicit-shift QL iteration on a symmetric tridiagonal matrix.

    ``z`` accumulates the rotations (pass the Householder ``q`` to get
    eigenvectors of the original matrix).  Returns unsorted ``(w, z)``.
    """
    d = np.array(d, dtype=float)
    n = d.size
    e = np.concatenate([np.asarray(e, dtype=float), [0.0]])
    z = np.eye(n) if z is None else np.array(z, dtype=float)
    eps = np.finfo(float).eps
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > max_sweeps:
                raise ArithmeticError(f"QL iteration did not converge for eigenvalue {l}")
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = np.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + np.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            deflated = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = np.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                zi1 = z[:, i + 1].copy()
                z[:, i + 1] = s * z[:, i] + c * zi1
                z[:, i] = c * z[:, i] - s * zi1
                i -= 1
            if deflated:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return d, z


def eigh_dense(a, backend: str = "lapack") -> EigenResult:
    """Full eigendecomposition of a dense symmetric operator.

    Parameters
    ----------
    a : SymmetricOperator or ndarray
        Dense operator.  Sparse operators are densified.
    backend : {"lapack", "native"}
        ``"native"`` uses Householder tridiagonalization followed by the
        implicit-shift QL iteration in this module (real input only).
        ``"lapack"`` calls the equivalent LAPACK driver (``?syev``/``?heev``).

    Returns
    -------
    EigenResult
        Eigenvalues ascending; eigenvectors orthonormal in the operator's
        inner product; residual norms ``||A v - lambda v||`` in that norm.
    """
    op = _as_operator(a)
    s = op.symmetric_matrix()
    s = s.toarray() if sp.issparse(s) else np.asarray(s)
    n = s.shape[0]
    if backend == "native":
        if n > NATIVE_EIGH_LIMIT:
            raise ValueError(f"native backend limited to dimension {NATIVE_EIGH_LIMIT}")
        if np.iscomplexobj(s):
            if np.abs(s.imag).max() > 0:
                raise ValueError("native backend handles real symmetric input only")
            s = s.real
        d, e, q = householder_tridiagonal(s)
        w, y = tridiagonal_ql(d, e, q)
        order = np.argsort(w, kind="stable")
        w, y = w[order], y[:, order]
    elif backend == "lapack":
        if n > LAPACK_EIGH_LIMIT:
            raise ValueError(f"lapack backend limited to dimension {LAPACK_EIGH_LIMIT}")
        w, y = sla.eigh(s, driver="ev")
    else:
        raise ValueError(f"unknown backend {backend!r}")
    res = np.linalg.norm(s @ y - y * w, axis=0)
    return EigenResult(w, op.from_symmetric(y), res)


# ---------------------------------------------------------------------------
# Lanczos
# ---------------------------------------------------------------------------

def _lanczos_run(apply, dim, locked, rng, dtype, max_steps, tol, want):
    """One Lanczos run in the complement of ``locked``; returns Ritz data."""
    def project(x):
        for _ in range(2):
            if locked.shape[1]:
                x = x - locked @ (locked.conj().T @ x)
            if basis:
                vb = np.column_stack(basis)
                x = x - vb @ (vb.conj().T @ x)
        return x

    basis: list[np.ndarray] = []
    alphas: list[float] = []
    betas: list[float] = []
    start = rng.standard_normal(dim)
    if np.issubdtype(dtype, np.complexfloating):
        start = start + 1j * rng.standard_normal(dim)
    q = project(start.astype(dtype))
    q /= np.linalg.norm(q)
    beta = 0.0
    theta = vecs = None
    for step in range(max_steps):
        basis.append(q)
        r = apply(q)
        alpha = float(np.real(np.vdot(q, r)))
        alphas.append(alpha)
        r = project(r)
        beta = float(np.linalg.norm(r))
        exhausted = beta <= 1e-12 * max(1.0, abs(alpha)) or len(basis) + locked.shape[1] >= dim
        check = exhausted or step == max_steps - 1 or (step + 1) % 8 == 0
        if check:
            t = np.diag(alphas) + np.diag(betas, 1) + np.diag(betas, -1)
            theta, vecs = np.linalg.eigh(t)
            est = np.abs(beta * vecs[-1, :]) if not exhausted else np.zeros_like(theta)
            nconv = 0
            for i in range(min(want, theta.size)):
                if est[i] <= tol:
                    nconv += 1
                else:
                    break
            if exhausted or nconv >= min(want, theta.size):
                break
        betas.append(beta)
        q = r / beta
    ritz = np.column_stack(basis) @ vecs
    est = np.abs(beta * vecs[-1, :]) if beta > 0 else np.zeros_like(theta)
    return theta, ritz, est


def lanczos_lowest(apply: Callable[[np.ndarray], np.ndarray], dim: int, k: int,
                   tol: float = 1e-8, seed: int = 0, max_iter: Optional[int] = None,
                   dtype=float, max_runs: Optional[int] = None) -> EigenResult:
    """Lowest ``k`` eigenpairs of a self-adjoint action by Lanczos.

    Each run keeps the whole Krylov basis and reorthogonalizes every new
    vector against it twice.  Converged Ritz pairs are locked and the next run
    restarts in their orthogonal complement, which recovers multiplicities
    that a single Krylov space cannot see.  The routine stops once ``k`` pairs
    are locked and a fresh run finds nothing below the largest of them.

    Parameters
    ----------
    apply : callable
        ``x -> A x`` for a Hermitian ``A`` in the Euclidean inner product
        (symmetrize weighted problems first).
    dim : int
        Problem dimension; ``k < dim`` is required.
    k : int
        Number of algebraically smallest eigenpairs wanted.
    tol : float
        Target residual ``||A v - theta v||`` per pair.
    seed : int
        Seed for the random start vectors.
    max_iter : int, optional
        Krylov dimension cap per run (default ``min(dim, max(40, 4k + 40))``).

    Returns
    -------
    EigenResult
        ``converged`` is False when any pair misses ``tol``.
    """
    if not 0 < k < dim:
        raise ValueError("need 0 < k < dim")
    rng = np.random.default_rng(seed)
    steps = min(dim, max_iter or max(40, 4 * k + 40))
    runs = max_runs or 4 * k + 10
    locked_vecs = np.zeros((dim, 0), dtype=dtype)
    locked_vals: list[float] = []
    locked_res: list[float] = []
    total = 0
    converged = True
    for _ in range(runs):
        want = k - len(locked_vals) if len(locked_vals) < k else 1
        theta, ritz, est = _lanczos_run(apply, dim, locked_vecs, rng, dtype,
                                        min(steps, dim - locked_vecs.shape[1]), tol, want)
        total += theta.size
        new = []
        for i in range(theta.size):
            if est[i] > tol:
                break
            new.append(i)
        if len(locked_vals) >= k:
            # verification pass: nothing new may lie below the current k-th value
            top = sorted(locked_vals)[k - 1]
            below = [i for i in new if theta[i] < top - tol]
            if not below:
                break
            new = below
        if not new:
            converged = False
            new = list(range(min(want, theta.size)))
        v = ritz[:, new]
        # re-orthonormalize against the locked set for safety
        v = v - locked_vecs @ (locked_vecs.conj().T @ v)
        v, _ = np.linalg.qr(v)
        locked_vecs = np.column_stack([locked_vecs, v])
        for j, i in enumerate(new):
            x = v[:, j]
            ax = apply(x)
            lam = float(np.real(np.vdot(x, ax)))
            locked_vals.append(lam)
            locked_res.append(float(np.linalg.norm(ax - lam * x)))
        if locked_vecs.shape[1] >= dim:
            break
    else:
        converged = False
    order = np.argsort(locked_vals, kind="stable")[:k]
    vals = np.asarray(locked_vals)[order]
    res = np.asarray(locked_res)[order]
    if np.any(res > tol):
        converged = False
    return EigenResult(vals, locked_vecs[:, order], res, converged, total)


def lanczos_operator(op: SymmetricOperator, k: int, tol: float = 1e-8,
                     seed: int = 0, **kw) -> EigenResult:
    """:func:`lanczos_lowest` on a :class:`SymmetricOperator` (weights honoured)."""
    s = op.symmetric_matrix()
    res = lanczos_lowest(lambda x: s @ x, op.dim, k, tol=tol, seed=seed,
                         dtype=np.result_type(op.dtype, float), **kw)
    res.eigenvectors = op.from_symmetric(res.eigenvectors)
    return res


def shift_invert_lowest(op: SymmetricOperator, k: int, sigma: float,
                        tol: float = 1e-10, seed: int = 0) -> EigenResult:
    """Eigenpairs of ``op`` just above ``sigma`` by Lanczos on ``-(A - sigma)^{-1}``.

    Requires ``sigma`` below the wanted eigenvalues.  The sparse LU comes from
    SuperLU.
    """
    s = sp.csc_matrix(op.symmetric_matrix())
    lu = spla.splu(s - sigma * sp.identity(op.dim, format="csc", dtype=s.dtype))
    res = lanczos_lowest(lambda x: -lu.solve(x), op.dim, k, tol=tol, seed=seed,
                         dtype=np.result_type(op.dtype, float))
    y = res.eigenvectors
    vals = np.real(np.einsum("ij,ij->j", y.conj(), s @ y))
    order = np.argsort(vals, kind="stable")
    y = y[:, order]
    vals = vals[order]
    resid = np.linalg.norm(s @ y - y * vals, axis=0)
    return EigenResult(vals, op.from_symmetric(y), resid, res.converged, res.iterations)


def lobpcg_lowest(op: SymmetricOperator, k: int, tol: float = 1e-8, seed: int = 0,
                  x0: Optional[np.ndarray] = None, max_iter: int = 400,
                  shift: Optional[float] = None) -> EigenResult:
    """Lowest eigenpairs of a large sparse real operator by AMG-preconditioned LOBPCG.

    The preconditioner is a smoothed-aggregation hierarchy (pyamg) built on
    ``S + shift I`` where ``S`` is the symmetrized matrix and ``shift`` makes
    it positive definite.  ``x0`` warm-starts the iteration (columns in the
    original basis).
    """
    import pyamg

    s = sp.csr_matrix(op.symmetric_matrix())
    if shift is None:
        shift = float(max(0.0, -s.diagonal().min() + 1.0)) + abs(float(s.diagonal().mean())) * 1e-3
    ml = pyamg.smoothed_aggregation_solver(s + shift * sp.identity(op.dim, format="csr"),
                                           symmetry="hermitian")
    m = ml.aspreconditioner(cycle="V")
    rng = np.random.default_rng(seed)
    if x0 is None:
        x = rng.standard_normal((op.dim, k))
    else:
        x = np.array(x0, dtype=float)
        if op.weights is not None:
            x = np.sqrt(op.weights)[:, None] * x
        if x.shape[1] < k:
            x = np.column_stack([x, rng.standard_normal((op.dim, k - x.shape[1]))])
        x = x[:, :k]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        vals, vecs = spla.lobpcg(s, x, M=m, tol=tol, maxiter=max_iter, largest=False)
    order = np.argsort(vals)
    vals, vecs = vals[order], vecs[:, order]
    vecs, _ = np.linalg.qr(vecs)
    # Rayleigh-Ritz on the returned block for clean pairs
    h = vecs.T @ (s @ vecs)
    w, c = np.linalg.eigh((h + h.T) / 2)
    vecs = vecs @ c
    res = np.linalg.norm(s @ vecs - vecs * w, axis=0)
    scale = max(1.0, float(np.abs(w).max()))
    return EigenResult(w, op.from_symmetric(vecs), res, bool(np.all(res <= tol * scale * 10)))


def lowest_eigenpairs(op: SymmetricOperator, k: int, dense_limit: int = 2500,
                      seed: int = 0, x0: Optional[np.ndarray] = None,
                      tol: float = 1e-9) -> EigenResult:
    """Lowest ``k`` eigenpairs, dense for small problems and LOBPCG otherwise."""
    if op.dim <= dense_limit:
        full = eigh_dense(op if not op.is_sparse else SymmetricOperator(op.to_dense(), op.weights, check=False))
        return EigenResult(full.eigenvalues[:k], full.eigenvectors[:, :k], full.residuals[:k])
    return lobpcg_lowest(op, k, tol=tol, seed=seed, x0=x0)


# ---------------------------------------------------------------------------
# Inertia
# ---------------------------------------------------------------------------

_BK_ALPHA = (1.0 + np.sqrt(17.0)) / 8.0


def bunch_kaufman(a: np.ndarray) -> tuple[list[np.ndarray], list[int]]:
    """Pivot blocks of a Bunch-Kaufman ``P A P^T = L D L^H`` factorization.

    Only the block-diagonal factor ``D`` is kept, since inertia needs nothing
    else.  Returns the list of 1x1 / 2x2 blocks and the step at which each was
    taken.
    """
    a = np.array(a, dtype=np.result_type(a, float))
    n = a.shape[0]
    blocks: list[np.ndarray] = []
    steps: list[int] = []
    k = 0
    while k < n:
        col = np.abs(a[k + 1:, k])
        akk = abs(a[k, k])
        if not np.isfinite(akk) or not np.all(np.isfinite(col)):
            raise FactorizationBreakdown(k, "non-finite entry in the active column")
        if col.size == 0 or col.max() == 0.0:
            size, piv = 1, k
        else:
            r = k + 1 + int(np.argmax(col))
            lam = col.max()
            if akk >= _BK_ALPHA * lam:
                size, piv = 1, k
            else:
                row_r = np.abs(np.concatenate([a[r, k:r], a[r + 1:, r]]))
                sigma = row_r.max()
                if akk * sigma >= _BK_ALPHA * lam * lam:
                    size, piv = 1, k
                elif abs(a[r, r]) >= _BK_ALPHA * sigma:
                    size, piv = 1, r
                else:
                    size, piv = 2, r
        swap_to = k if size == 1 else k + 1
        if piv != swap_to:
            a[[swap_to, piv], :] = a[[piv, swap_to], :]
            a[:, [swap_to, piv]] = a[:, [piv, swap_to]]
        if size == 1:
            d = a[k, k]
            blocks.append(np.array([[d]]))
            steps.append(k)
            if d != 0.0:
                l = a[k + 1:, k] / d
                a[k + 1:, k + 1:] -= np.outer(l, a[k, k + 1:])
            k += 1
        else:
            d = a[k:k + 2, k:k + 2].copy()
            blocks.append(d)
            steps.append(k)
            det = d[0, 0] * d[1, 1] - abs(d[1, 0]) ** 2
            if det == 0.0 or not np.isfinite(det):
                raise FactorizationBreakdown(k, "singular 2x2 pivot block")
            dinv = np.array([[d[1, 1], -d[0, 1]], [-d[1, 0], d[0, 0]]]) / det
            c = a[k + 2:, k:k + 2]
            l = c @ dinv
            a[k + 2:, k + 2:] -= l @ c.conj().T
            k += 2
    return blocks, steps


def _block_eigenvalues(blocks) -> np.ndarray:
    out = []
    for b in blocks:
        if b.shape == (1, 1):
            out.append(float(np.real(b[0, 0])))
        else:
            a, c = float(np.real(b[0, 0])), float(np.real(b[1, 1]))
            off = abs(b[1, 0])
            mid, rad = (a + c) / 2, np.hypot((a - c) / 2, off)
            out.extend([mid - rad, mid + rad])
    return np.array(out)


def _ldl_lapack_blocks(s: np.ndarray) -> np.ndarray:
    _, d, _ = sla.ldl(s, lower=True, hermitian=True)
    n = d.shape[0]
    out = []
    i = 0
    while i < n:
        if i + 1 < n and d[i + 1, i] != 0:
            out.append(d[i:i + 2, i:i + 2])
            i += 2
        else:
            out.append(d[i:i + 1, i:i + 1])
            i += 1
    return _block_eigenvalues(out)


def inertia_count(a, sigma: float = 0.0, backend: str = "auto",
                  zero_tol: Optional[float] = None) -> tuple[int, int, int]:
    """Counts of eigenvalues below, at and above ``sigma``.

    Uses Sylvester's law of inertia on a Bunch-Kaufman factorization of
    ``A - sigma I`` (symmetrized when weighted).  A pivot-block eigenvalue of
    magnitude at most ``zero_tol`` (default: the operator's zero tolerance)
    counts as "at".

    Parameters
    ----------
    backend : {"auto", "native", "lapack"}
        ``"native"`` is the factorization in this module; ``"lapack"`` is
        ``?sytrf``/``?hetrf`` via :func:`scipy.linalg.ldl`.  ``"auto"`` picks
        native up to 800 rows.
    """
    op = _as_operator(a)
    tau = op.zero_tolerance() if zero_tol is None else zero_tol
    s = op.symmetric_matrix()
    s = s.toarray() if sp.issparse(s) else np.array(s)
    s = s - sigma * np.eye(op.dim)
    if backend == "auto":
        backend = "native" if op.dim <= 800 else "lapack"
    if backend == "native":
        ev = _block_eigenvalues(bunch_kaufman(s)[0])
    elif backend == "lapack":
        if not np.all(np.isfinite(s)):
            raise FactorizationBreakdown(0, "non-finite input")
        ev = _ldl_lapack_blocks(s)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    if not np.all(np.isfinite(ev)):
        bad = int(np.argmin(np.isfinite(ev)))
        raise FactorizationBreakdown(bad, "non-finite pivot")
    zero = np.abs(ev) <= tau
    return int(np.sum((ev < 0) & ~zero)), int(np.sum(zero)), int(np.sum((ev > 0) & ~zero))
