"""Grid Yamabe operators on conformally rescaled n-tori.

Nodes sit at ``x = h * i`` with ``h = 1/N`` and ``i`` a multi-index; every
field is a C-ordered array of shape ``(N,) * n`` (axis 0 is ``x_1``), and
flattening is axis-major.

Metrics are ``g_hat = e^{2 U} g`` with ``g`` either flat or the warped
torus metric

    g = dx_1^2 + sum_{a >= 2} e^{2 phi_a(x_1)} dx_a^2,
    phi_a(x) = A_a cos(2 pi x) + B_a.

The warped base matters because every metric conformal to the flat torus has
a nonnegative Yamabe operator with one-dimensional kernel; negative directions
and sign-changing null vectors need a base outside that class.  With
``phi_3 = -phi_2 - 2B`` the volume density is constant and ``R_g = -2 phi_2'^2``,
so on functions of ``x_1`` alone the Yamabe operator is a periodic Schrodinger
operator ``-u'' - c_n 2 phi_2'^2 u`` and the amplitude tunes its second
eigenvalue through zero.

The Laplace-Beltrami operator is in flux form: an edge along axis ``i``
carries conductance ``h^{n-2} sqrt(det g_hat) g_hat^{ii}`` evaluated at the
edge midpoint (``U`` averaged, the warp evaluated exactly), and node ``p``
carries the weight ``sqrt(det g_hat) h^n``.  The operator is self-adjoint for
those weights and annihilates constants.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .linalg import (EigenResult, SymmetricOperator, eigh_dense, inertia_count, lobpcg_lowest,
                     shift_invert_lowest)


class NoSignChange(RuntimeError):
    """The tracked eigenvalue keeps one sign along the sampled path."""


class KernelGapWarning(UserWarning):
    """Spectral gap around the zero window is too small to trust the kernel dimension."""


def yamabe_constant(n: int) -> float:
    return (n - 2) / (4.0 * (n - 1))


# ---------------------------------------------------------------------------
# Grid, base metrics, conformal factors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TorusGrid:
    n: int = 3
    N: int = 16

    def __post_init__(self):
        if not 3 <= self.n <= 4:
            raise ValueError("torus dimension must be 3 or 4")
        if self.N < 8:
            raise ValueError("need at least 8 nodes per axis")

    @property
    def h(self) -> float:
        return 1.0 / self.N

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.n

    @property
    def size(self) -> int:
        return self.N ** self.n

    def coordinate(self, axis: int) -> np.ndarray:
        """Coordinate ``x_axis`` at every node, shape ``grid.shape``."""
        x = np.arange(self.N) * self.h
        view = [1] * self.n
        view[axis] = self.N
        return np.broadcast_to(x.reshape(view), self.shape).copy()

    def points(self) -> np.ndarray:
        return np.stack([self.coordinate(a).ravel() for a in range(self.n)], axis=1)

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape)

    def neighbor_index(self, axis: int, step: int = 1) -> np.ndarray:
        """Flat index of the neighbor ``i + step e_axis`` of every node."""
        idx = np.arange(self.size).reshape(self.shape)
        return np.roll(idx, -step, axis=axis).ravel()


@dataclass(frozen=True)
class WarpedBase:
    """``g = dx_1^2 + sum_a e^{2 phi_a(x_1)} dx_a^2`` with ``phi_a = A_a cos(2 pi x_1) + B_a``."""

    amplitudes: tuple[float, ...]
    offsets: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", tuple(float(a) for a in self.amplitudes))
        object.__setattr__(self, "offsets", tuple(float(b) for b in self.offsets))
        if len(self.amplitudes) != len(self.offsets):
            raise ValueError("one amplitude and one offset per warped axis")

    @property
    def dimension(self) -> int:
        return len(self.amplitudes) + 1

    def log_scales(self, x1: np.ndarray) -> np.ndarray:
        """``(a_1, ..., a_n)`` with ``g_ii = e^{2 a_i}``; ``a_1 = 0``."""
        x1 = np.asarray(x1, dtype=float)
        out = [np.zeros_like(x1)]
        c = np.cos(2 * math.pi * x1)
        out += [a * c + b for a, b in zip(self.amplitudes, self.offsets)]
        return np.stack(out)

    def scalar_curvature(self, x1: np.ndarray) -> np.ndarray:
        """``R = -2 sum phi_a'' - sum phi_a'^2 - (sum phi_a')^2``."""
        x1 = np.asarray(x1, dtype=float)
        amp = np.array(self.amplitudes)
        w = 2 * math.pi
        d1 = -w * np.sin(w * x1)[..., None] * amp
        d2 = -w * w * np.cos(w * x1)[..., None] * amp
        return -2 * d2.sum(-1) - (d1 ** 2).sum(-1) - d1.sum(-1) ** 2


def tuned_warp(n: int, c: float, offset: float = 2.0) -> WarpedBase:
    """Warp with ``phi_2 = c cos - K``, ``phi_3 = -c cos - K`` (and ``phi_4 = -K``)."""
    amps = (c, -c) + (0.0,) * (n - 3)
    return WarpedBase(amps, (-offset,) * (n - 1))


def bandlimited_field(grid: TorusGrid, seed: int, amplitude: float = 1.0,
                      max_freq: int = 2, zero_mean: bool = True) -> np.ndarray:
    """Random real trigonometric polynomial with ``|k|_inf <= max_freq``, scaled to ``max|f| = amplitude``."""
    rng = np.random.default_rng(seed)
    out = np.zeros(grid.shape)
    xs = [grid.coordinate(a) for a in range(grid.n)]
    for k in itertools.product(range(-max_freq, max_freq + 1), repeat=grid.n):
        if k <= tuple(-v for v in k):
            continue
        phase = 2 * math.pi * sum(ki * xi for ki, xi in zip(k, xs))
        a, b = rng.standard_normal(2)
        out += a * np.cos(phase) + b * np.sin(phase)
    if not zero_mean:
        out += rng.standard_normal()
    peak = np.abs(out).max()
    return out * (amplitude / peak) if peak > 0 else out


@dataclass(frozen=True)
class ConformalFactor:
    """Samples of ``U`` with cached exponentials ``e^{w U}``."""

    values: np.ndarray
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(v)):
            raise ValueError("conformal factor must be finite")
        object.__setattr__(self, "values", v)

    def exp(self, w: float) -> np.ndarray:
        if w not in self._cache:
            self._cache[w] = np.exp(w * self.values)
        return self._cache[w]


def bandlimited_factor(grid: TorusGrid, amplitude: float, seed: int, max_freq: int = 2) -> ConformalFactor:
    return ConformalFactor(bandlimited_field(grid, seed, amplitude, max_freq))


@dataclass(frozen=True)
class FamilySpec:
    """Seeded conformal family: factor ``i`` uses seed ``seed + i``."""

    seed: int = 0
    amplitude: float = 0.5
    count: int = 5

    def factors(self, grid: TorusGrid) -> list[ConformalFactor]:
        return [bandlimited_factor(grid, self.amplitude, self.seed + i) for i in range(self.count)]


def _as_field(grid: TorusGrid, upsilon) -> np.ndarray:
    if upsilon is None:
        return grid.zeros()
    if isinstance(upsilon, ConformalFactor):
        upsilon = upsilon.values
    u = np.asarray(upsilon, dtype=float)
    if u.ndim == 0:
        return np.full(grid.shape, float(u))
    return u.reshape(grid.shape)


@dataclass(frozen=True)
class DiscreteConformalMetric:
    """``g_hat = e^{2 U} g`` sampled on ``grid``; ``base=None`` is the flat metric."""

    grid: TorusGrid
    upsilon: np.ndarray
    base: Optional[WarpedBase] = None

    def __post_init__(self):
        object.__setattr__(self, "upsilon", _as_field(self.grid, self.upsilon))
        if self.base is not None and self.base.dimension != self.grid.n:
            raise ValueError("warp dimension does not match the grid")

    def log_scales(self, x1: np.ndarray) -> np.ndarray:
        if self.base is None:
            return np.zeros((self.grid.n,) + np.shape(x1))
        return self.base.log_scales(x1)

    @property
    def base_weights(self) -> np.ndarray:
        a = self.log_scales(self.grid.coordinate(0))
        return (np.exp(a.sum(0)) * self.grid.h ** self.grid.n).ravel()

    @property
    def weights(self) -> np.ndarray:
        """``e^{n U} sqrt(det g) h^n`` per node, flat."""
        return np.exp(self.grid.n * self.upsilon).ravel() * self.base_weights

    @property
    def volume(self) -> float:
        return float(self.weights.sum())

    def base_metric(self) -> "DiscreteConformalMetric":
        return DiscreteConformalMetric(self.grid, None, self.base)

    def with_factor(self, upsilon) -> "DiscreteConformalMetric":
        return DiscreteConformalMetric(self.grid, upsilon, self.base)

    def conductances(self, axis: int) -> np.ndarray:
        """``h^{n-2} sqrt(det g_hat) g_hat^{ii}`` at the midpoint toward ``+e_axis``."""
        g = self.grid
        n = g.n
        x1 = g.coordinate(0) + (0.5 * g.h if axis == 0 else 0.0)
        a = self.log_scales(x1)
        up = 0.5 * (self.upsilon + np.roll(self.upsilon, -1, axis=axis))
        return (np.exp((n - 2) * up + a.sum(0) - 2 * a[axis]) * g.h ** (n - 2)).ravel()

    @property
    def separable(self) -> bool:
        """True when every coefficient depends on ``x_1`` only."""
        u = self.upsilon
        return bool(np.all(u == u[(slice(None),) + (slice(0, 1),) * (self.grid.n - 1)]))


def _stiffness(metric: DiscreteConformalMetric) -> sp.csr_matrix:
    g = metric.grid
    rows, cols, vals = [], [], []
    idx = np.arange(g.size)
    diag = np.zeros(g.size)
    for axis in range(g.n):
        c = metric.conductances(axis)
        j = g.neighbor_index(axis)
        rows += [idx, j]
        cols += [j, idx]
        vals += [-c, -c]
        diag += c
        np.add.at(diag, j, c)
    rows.append(idx)
    cols.append(idx)
    vals.append(diag)
    return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                         shape=(g.size, g.size))


def laplace_beltrami(metric: DiscreteConformalMetric) -> SymmetricOperator:
    """Nonnegative Laplace-Beltrami operator of ``g_hat`` in flux form."""
    w = metric.weights
    return SymmetricOperator(sp.diags(1.0 / w) @ _stiffness(metric), w)


def _centered_gradient_sq(metric: DiscreteConformalMetric, f: np.ndarray) -> np.ndarray:
    """``|grad f|_g^2`` for the base metric, centered differences."""
    g = metric.grid
    a = metric.log_scales(g.coordinate(0))
    out = np.zeros(g.shape)
    for axis in range(g.n):
        df = (np.roll(f, -1, axis) - np.roll(f, 1, axis)) / (2 * g.h)
        out += np.exp(-2 * a[axis]) * df ** 2
    return out


def base_scalar_curvature(metric: DiscreteConformalMetric) -> np.ndarray:
    if metric.base is None:
        return metric.grid.zeros()
    return metric.base.scalar_curvature(metric.grid.coordinate(0))


def scalar_curvature_conformal(upsilon, grid: TorusGrid, base: Optional[WarpedBase] = None) -> np.ndarray:
    """``R_hat = e^{-2U} (R_g + 2(n-1) Delta_g U - (n-1)(n-2) |grad U|_g^2)``.

    ``Delta_g`` is the nonnegative grid Laplacian of the base, the gradient
    uses centered differences.  Returns an array of shape ``grid.shape``.
    """
    n = grid.n
    up = _as_field(grid, upsilon)
    base_metric = DiscreteConformalMetric(grid, None, base)
    lap = (laplace_beltrami(base_metric).matvec(up.ravel())).reshape(grid.shape)
    grad2 = _centered_gradient_sq(base_metric, up)
    r0 = base_scalar_curvature(base_metric)
    return np.exp(-2 * up) * (r0 + 2 * (n - 1) * lap - (n - 1) * (n - 2) * grad2)


def yamabe_direct(metric: DiscreteConformalMetric) -> SymmetricOperator:
    """``Delta_{g_hat} + (n-2)/(4(n-1)) R_hat`` assembled from ``g_hat`` itself."""
    n = metric.grid.n
    lb = laplace_beltrami(metric)
    r = scalar_curvature_conformal(metric.upsilon, metric.grid, metric.base).ravel()
    return SymmetricOperator(lb.matrix + sp.diags(yamabe_constant(n) * r), lb.weights)


def yamabe_conjugated(upsilon, grid: TorusGrid, base: Optional[WarpedBase] = None) -> SymmetricOperator:
    """``u -> e^{-(n+2)U/2} P_g (e^{(n-2)U/2} u)`` with ``P_g`` the base grid Yamabe operator.

    Exactly congruent to ``P_g``; self-adjoint for the ``g_hat`` weights.
    """
    n = grid.n
    up = _as_field(grid, upsilon).ravel()
    p0 = yamabe_direct(DiscreteConformalMetric(grid, None, base))
    left = sp.diags(np.exp(-(n + 2) * up / 2))
    right = sp.diags(np.exp((n - 2) * up / 2))
    return SymmetricOperator(sp.csr_matrix(left @ p0.matrix @ right), np.exp(n * up) * p0.weights)


def density_transform(u: np.ndarray, upsilon, w: float) -> np.ndarray:
    """Weight-``w`` density rule ``u -> e^{-w U} u``, in the shape of ``u``."""
    up = np.asarray(upsilon.values if isinstance(upsilon, ConformalFactor) else upsilon, dtype=float)
    u = np.asarray(u)
    factor = np.exp(-w * up)
    return (factor.reshape(u.shape) if factor.size > 1 else factor) * u


def weighted_norm(u: np.ndarray, weights: np.ndarray) -> float:
    return float(np.sqrt(np.sum(weights * np.abs(np.ravel(u)) ** 2)))


def covariance_residual(upsilon, grid: TorusGrid, base: Optional[WarpedBase] = None,
                        tests: int = 10, seed: int = 0) -> float:
    """Largest ``||(direct - conjugated) u|| / ||u||`` over smooth test vectors (``g_hat`` norm)."""
    metric = DiscreteConformalMetric(grid, upsilon, base)
    d = yamabe_direct(metric)
    c = yamabe_conjugated(metric.upsilon, grid, base)
    w = metric.weights
    worst = 0.0
    for i in range(tests):
        u = bandlimited_field(grid, seed + 1000 + i, 1.0, zero_mean=False).ravel()
        worst = max(worst, weighted_norm(d.matvec(u) - c.matvec(u), w) / weighted_norm(u, w))
    return worst


# ---------------------------------------------------------------------------
# Eigenvalues
# ---------------------------------------------------------------------------

def gershgorin_lower(op: SymmetricOperator) -> float:
    s = sp.csr_matrix(op.symmetric_matrix())
    diag = s.diagonal().real
    off = np.asarray(abs(s).sum(axis=1)).ravel() - np.abs(diag)
    return float((diag - off).min())


def lowest_modes(op: SymmetricOperator, k: int, x0: Optional[np.ndarray] = None,
                 seed: int = 0, lower_bound: Optional[float] = None) -> EigenResult:
    """Lowest ``k`` eigenpairs of a grid operator.

    Dense LAPACK up to 1500 rows.  Up to 5000 rows: sparse shift-invert
    below ``lower_bound`` (default: the Gershgorin bound), confirmed by an
    inertia count at the lowest value found, with a dense fallback when the
    count shows a missed eigenvalue.  Beyond: AMG-preconditioned LOBPCG.
    """
    k = min(k, op.dim - 1)

    def dense():
        s = op.symmetric_matrix()
        s = s.toarray() if sp.issparse(s) else np.asarray(s)
        vals, vecs = sla.eigh(s, subset_by_index=[0, k - 1], driver="evr")
        res = np.linalg.norm(s @ vecs - vecs * vals, axis=0)
        return EigenResult(vals, op.from_symmetric(vecs), res)

    if op.dim <= 1500:
        full = eigh_dense(SymmetricOperator(op.to_dense(), op.weights, check=False))
        return EigenResult(full.eigenvalues[:k], full.eigenvectors[:, :k], full.residuals[:k])
    if op.dim <= 5000:
        sigma = (gershgorin_lower(op) if lower_bound is None else lower_bound) - 1.0
        res = shift_invert_lowest(op, k, sigma=sigma, tol=1e-12, seed=seed)
        gap = 1e-6 * (1.0 + abs(res.eigenvalues[0]))
        if inertia_count(op, sigma=res.eigenvalues[0] - gap, zero_tol=0.0)[0] == 0:
            return res
        return dense()
    return lobpcg_lowest(op, k, tol=1e-9, seed=seed, x0=x0, max_iter=600)


@dataclass
class SeparableSpectrum:
    """Eigenvalues of an ``x_1``-separable grid operator with their Fourier modes."""

    eigenvalues: np.ndarray
    modes: list
    line_vectors: list
    metric: DiscreteConformalMetric

    def vectors(self, count: Optional[int] = None) -> np.ndarray:
        """Real eigenvectors ``v(x_1) cos`` or ``v(x_1) sin`` of the fibre mode, unit weighted norm."""
        g = self.metric.grid
        w = self.metric.weights
        count = len(self.eigenvalues) if count is None else count
        cols = []
        ys = [g.coordinate(a) for a in range(1, g.n)]
        for (mode, kind), v in zip(self.modes[:count], self.line_vectors[:count]):
            phase = 2 * math.pi * sum(m * y for m, y in zip(mode, ys)) if mode else g.zeros()
            fib = np.cos(phase) if kind == "cos" else np.sin(phase)
            vec = (v.reshape((g.N,) + (1,) * (g.n - 1)) * fib).ravel()
            cols.append(vec / weighted_norm(vec, w))
        return np.column_stack(cols) if cols else np.zeros((g.size, 0))


def _line_data(metric: DiscreteConformalMetric):
    g = metric.grid
    sl = (slice(None),) + (0,) * (g.n - 1)
    w = metric.weights.reshape(g.shape)[sl]
    c0 = metric.conductances(0).reshape(g.shape)[sl]
    cf = [metric.conductances(a).reshape(g.shape)[sl] for a in range(1, g.n)]
    r = scalar_curvature_conformal(metric.upsilon, g, metric.base)[sl]
    return w, c0, cf, yamabe_constant(g.n) * r


def separable_spectrum(metric: DiscreteConformalMetric, count: int, shift: float = 0.0) -> SeparableSpectrum:
    """Lowest ``count`` eigenvalues of ``yamabe_direct(metric) + shift`` via fibre Fourier blocks.

    When all coefficients depend on ``x_1`` alone the grid operator commutes
    with translations in ``x_2..x_n``; each fibre mode ``m`` gives an ``N x N``
    periodic Jacobi block.  Blocks are visited in order of a lower bound and
    skipped once the bound passes the ``count``-th value found.
    """
    if not metric.separable:
        raise ValueError("metric coefficients depend on more than x_1")
    g = metric.grid
    N = g.N
    w, c0, cf, pot = _line_data(metric)
    lap = np.zeros((N, N))
    i = np.arange(N)
    j = (i + 1) % N
    np.add.at(lap, (i, i), c0)
    np.add.at(lap, (j, j), c0)
    np.add.at(lap, (i, j), -c0)
    np.add.at(lap, (j, i), -c0)
    r = 1.0 / np.sqrt(w)
    s0 = r[:, None] * lap * r[None, :] + np.diag(pot + shift)
    base_min = float(np.linalg.eigvalsh(s0)[0])

    def fibre(mode):
        return sum(c * 4 * math.sin(math.pi * m / N) ** 2 for c, m in zip(cf, mode)) / w if mode else np.zeros(N)

    all_modes = list(itertools.product(range(N), repeat=g.n - 1))
    bounds = [(base_min + float(fibre(m).min()), m) for m in all_modes]
    bounds.sort(key=lambda t: t[0])
    found = []
    for bound, mode in bounds:
        if len(found) >= count and bound > sorted(f[0] for f in found)[count - 1]:
            break
        vals, vecs = np.linalg.eigh(s0 + np.diag(fibre(mode)))
        neg = tuple((-m) % N for m in mode)
        if mode == neg:
            kind = "cos"
        else:
            kind = "cos" if mode > neg else "sin"
            if kind == "sin":
                mode = neg
        for lam, v in zip(vals[:count], vecs[:, :count].T):
            found.append((float(lam), (tuple(mode) if any(mode) else (), kind), r * v))
    found.sort(key=lambda f: (f[0], f[1][1]))
    found = found[:count]
    return SeparableSpectrum(np.array([f[0] for f in found]), [f[1] for f in found],
                             [f[2] for f in found], metric)


def metric_lowest(metric: DiscreteConformalMetric, count: int, x0=None) -> EigenResult:
    """Lowest eigenpairs of ``yamabe_direct(metric)``, using the fibre blocks when separable."""
    if metric.separable:
        spec = separable_spectrum(metric, count)
        vecs = spec.vectors()
        return EigenResult(spec.eigenvalues, vecs, np.zeros(len(spec.eigenvalues)))
    return lowest_modes(yamabe_direct(metric), count, x0=x0)


def negative_count(metric: DiscreteConformalMetric, tau: float, limit: int = 64) -> int:
    """Number of eigenvalues of ``yamabe_direct(metric)`` below ``-tau``."""
    count = 4
    while True:
        vals = metric_lowest(metric, count).eigenvalues
        if vals[-1] >= -tau or count >= limit:
            return int(np.sum(vals < -tau))
        count *= 2


# ---------------------------------------------------------------------------
# Kernels and tuning
# ---------------------------------------------------------------------------

@dataclass
class KernelBasis:
    """Null eigenvectors (orthonormal in the operator's weights)."""

    vectors: np.ndarray
    eigenvalues: np.ndarray
    tolerance: float
    window: tuple[float, float]
    nearest_outside: float = math.inf
    warning: Optional[str] = None
    weights: Optional[np.ndarray] = None

    @property
    def dimension(self) -> int:
        return self.vectors.shape[1]


def kernel_basis(op: SymmetricOperator, tau: Optional[float] = None, probe: int = 6,
                 eig: Optional[EigenResult] = None) -> KernelBasis:
    """Eigenvectors with ``|lambda| <= tau`` (default: the operator's zero tolerance).

    Attaches a :class:`KernelGapWarning` when the nearest eigenvalue outside
    the window is closer than ``10 tau``.
    """
    tau = op.zero_tolerance() if tau is None else tau
    k = probe
    while True:
        res = eig if eig is not None else lowest_modes(op, k)
        vals = res.eigenvalues
        if eig is not None or vals[-1] > tau or k >= op.dim - 1:
            break
        k = min(2 * k, op.dim - 1)
    inside = np.abs(vals) <= tau
    outside = np.abs(vals[~inside])
    nearest = float(outside.min()) if outside.size else math.inf
    msg = None
    if nearest < 10 * tau:
        msg = (f"nearest eigenvalue outside the zero window is {nearest:.3e} < 10 * tau = {10 * tau:.3e}; "
               "kernel dimension unreliable")
        warnings.warn(msg, KernelGapWarning, stacklevel=2)
    return KernelBasis(res.eigenvectors[:, inside], vals[inside], tau, (-tau, tau), nearest, msg, op.weights)


@dataclass
class TuneResult:
    c: float
    eigenvalue: float
    bracket: tuple[float, float]
    iterations: int
    index: int
    tolerance: float
    nu_below: int
    nu_above: int
    samples: list = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return abs(self.eigenvalue) < self.tolerance

    def to_dict(self) -> dict:
        return {"c": self.c, "eigenvalue": self.eigenvalue, "bracket": list(self.bracket),
                "iterations": self.iterations, "index": self.index, "tolerance": self.tolerance,
                "nu_below": self.nu_below, "nu_above": self.nu_above, "converged": self.converged}


def warped_family(grid: TorusGrid, offset: float = 2.0, upsilon=None) -> Callable[[float], DiscreteConformalMetric]:
    """``c -> e^{2U} (dx_1^2 + e^{2(c cos - K)} dx_2^2 + e^{2(-c cos - K)} dx_3^2 [+ e^{-2K} dx_4^2])``."""
    return lambda c: DiscreteConformalMetric(grid, upsilon, tuned_warp(grid.n, c, offset))


def scaled_factor_family(grid: TorusGrid, upsilon0, base: Optional[WarpedBase] = None):
    """``c -> e^{2 c U_0} g``."""
    u0 = _as_field(grid, upsilon0)
    return lambda c: DiscreteConformalMetric(grid, c * u0, base)


def tune_to_kernel(family: Callable[[float], DiscreteConformalMetric], j: int,
                   c_range: tuple[float, float] = (1.5, 3.0), samples: int = 7,
                   iterations: int = 60, tolerance: Optional[float] = None) -> TuneResult:
    """Bisection for ``c*`` with ``lambda_j(yamabe_direct(family(c*))) = 0`` (``j`` 1-based).

    The path is sampled at ``samples`` points; the first sign change of
    ``lambda_j`` is then bisected ``iterations`` times.  Eigenvalues depend
    continuously on ``c``, so the limit point carries a null eigenvalue.
    """
    if j < 1:
        raise ValueError("j is 1-based")
    lam = lambda c: float(metric_lowest(family(c), j).eigenvalues[j - 1])
    cs = np.linspace(c_range[0], c_range[1], samples)
    vals = [lam(c) for c in cs]
    bracket = None
    for a, b, fa, fb in zip(cs, cs[1:], vals, vals[1:]):
        if fa == 0.0:
            bracket = (a, a, fa, fa)
            break
        if fa * fb < 0:
            bracket = (a, b, fa, fb)
            break
    if bracket is None:
        raise NoSignChange(f"lambda_{j} keeps one sign on c in [{c_range[0]}, {c_range[1]}]: "
                           + ", ".join(f"{v:.3e}" for v in vals))
    lo, hi, flo, fhi = bracket
    it = 0
    while it < iterations and hi > lo:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        fm = lam(mid)
        it += 1
        if fm == 0.0:
            lo = hi = mid
            flo = fhi = fm
            break
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
    c_star, f_star = (lo, flo) if abs(flo) <= abs(fhi) else (hi, fhi)
    op = yamabe_direct(family(c_star))
    tau = op.zero_tolerance() if tolerance is None else tolerance
    nu_lo = negative_count(family(bracket[0]), 0.0)
    nu_hi = negative_count(family(bracket[1]), 0.0)
    return TuneResult(float(c_star), float(f_star), (float(bracket[0]), float(bracket[1])), it, j, tau,
                      nu_lo, nu_hi, list(zip(cs.tolist(), vals)))


@dataclass
class TunedKernel:
    """A tuned metric with its null vector and spectral data."""

    metric: DiscreteConformalMetric
    tune: TuneResult
    operator: SymmetricOperator
    null_vector: np.ndarray
    eigenvalues: np.ndarray
    nu: int
    tolerance: float


def tuned_kernel_example(N: int, n: int = 3, offset: float = 2.0, j: int = 2,
                         c_range: tuple[float, float] = (1.5, 3.0)) -> TunedKernel:
    """Warped base tuned so that ``lambda_j = 0``; ``nu = j - 1`` below the null eigenvalue."""
    grid = TorusGrid(n, N)
    family = warped_family(grid, offset)
    res = tune_to_kernel(family, j, c_range)
    metric = family(res.c)
    op = yamabe_direct(metric)
    tau = op.zero_tolerance()
    spec = separable_spectrum(metric, j + 3)
    u = spec.vectors(j)[:, j - 1]
    nu = int(np.sum(spec.eigenvalues < -tau))
    return TunedKernel(metric, res, op, u, spec.eigenvalues, nu, tau)
