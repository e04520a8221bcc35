"""Nodal domains, level sets and the boundary-flux identities on periodic grids.

Functions are sampled on C-ordered arrays of shape ``(N,) * n``; two nodes
are adjacent when they differ by one step along one axis (periodically).

Boundary integrals use edge-midpoint face quadrature.  For an edge along axis
``e`` crossing the nodal set, ``||grad u|| dsigma`` is replaced by
``|d_e u| * c_e * h`` where ``c_e = h^{n-2} sqrt(det g) g^{ee}`` is the edge
conductance of the metric; this is the flux of ``grad u`` through the dual
face, and accounts for the obliquity of the face automatically.  The
derivative ``d_e u`` is the one-sided difference taken from inside the
domain.  The quadrature is first-order accurate.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .conformal import DiscreteConformalMetric, base_scalar_curvature, yamabe_constant
from .linalg import SymmetricOperator


class NumericallyZero(ValueError):
    """Every sample is within tolerance of zero."""


def _edges(shape: tuple[int, ...]) -> np.ndarray:
    """All periodic grid edges as rows ``(i, j, axis)`` with ``j = i + e_axis``."""
    idx = np.arange(int(np.prod(shape))).reshape(shape)
    out = []
    for axis in range(len(shape)):
        j = np.roll(idx, -1, axis=axis).ravel()
        out.append(np.column_stack([idx.ravel(), j, np.full(idx.size, axis)]))
    return np.concatenate(out)


def default_tolerance(u: np.ndarray) -> float:
    return 1e-9 * float(np.abs(u).max())


@dataclass
class NodalDecomposition:
    """Labels per node (0 = numerically zero), sign per domain and boundary edges."""

    shape: tuple[int, ...]
    labels: np.ndarray
    count: int
    signs: np.ndarray
    boundary_edges: np.ndarray
    tolerance: float

    def mask(self, label: int) -> np.ndarray:
        if not 1 <= label <= self.count:
            raise ValueError(f"domain label {label} not in 1..{self.count}")
        return self.labels == label

    def domain_boundary(self, label: int) -> np.ndarray:
        """Boundary edges with exactly one endpoint in the domain, oriented ``(inside, outside, axis, step)``."""
        m = self.mask(label)
        e = self.boundary_edges
        a, b = m[e[:, 0]], m[e[:, 1]]
        fwd = e[a & ~b]
        bwd = e[b & ~a]
        rows = [np.column_stack([fwd[:, 0], fwd[:, 1], fwd[:, 2], np.ones(len(fwd), int)]),
                np.column_stack([bwd[:, 1], bwd[:, 0], bwd[:, 2], -np.ones(len(bwd), int)])]
        return np.concatenate(rows)

    def to_dict(self) -> dict:
        return {"count": self.count, "labels": self.labels.tolist(),
                "sign": self.signs.tolist(), "boundary_edges": self.boundary_edges.tolist(),
                "shape": list(self.shape), "tolerance": self.tolerance}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def nodal_domains(u: np.ndarray, tol: Optional[float] = None) -> NodalDecomposition:
    """Connected components of ``{u > tol}`` and ``{u < -tol}`` on the periodic grid.

    Domains are labelled ``1..count`` in order of their smallest node index.
    """
    u = np.asarray(u, dtype=float)
    shape = u.shape
    flat = u.ravel()
    tol = default_tolerance(u) if tol is None else float(tol)
    sign = np.where(flat > tol, 1, np.where(flat < -tol, -1, 0))
    if not np.any(sign):
        raise NumericallyZero("function numerically zero")
    edges = _edges(shape)
    si, sj = sign[edges[:, 0]], sign[edges[:, 1]]
    same = (si == sj) & (si != 0)
    size = flat.size
    graph = sp.coo_matrix((np.ones(int(same.sum())), (edges[same, 0], edges[same, 1])), shape=(size, size))
    _, comp = connected_components(graph, directed=False)
    nz = np.flatnonzero(sign)
    # deterministic labels: order components by their smallest node index
    first = {}
    for node in nz:
        first.setdefault(comp[node], node)
    order = sorted(first, key=first.get)
    relabel = {c: i + 1 for i, c in enumerate(order)}
    labels = np.zeros(size, dtype=int)
    labels[nz] = [relabel[c] for c in comp[nz]]
    signs = np.array([sign[first[c]] for c in order], dtype=int)
    boundary = edges[(si * sj < 0) | ((si == 0) != (sj == 0))]
    return NodalDecomposition(shape, labels, len(order), signs, boundary, tol)


def isomorphic(a: NodalDecomposition, b: NodalDecomposition) -> bool:
    """Same partition of the nodes (labels may differ by a bijection), same zero set."""
    if a.shape != b.shape or a.count != b.count:
        return False
    if not np.array_equal(a.labels == 0, b.labels == 0):
        return False
    nz = a.labels > 0
    pairs = set(zip(a.labels[nz].tolist(), b.labels[nz].tolist()))
    return len(pairs) == a.count


@dataclass
class CourantVerdict:
    passed: bool
    count: int
    bound: int

    def to_dict(self) -> dict:
        return {"passed": self.passed, "count": self.count, "bound": self.bound}


def courant_check(u: np.ndarray, nu: int, tol: Optional[float] = None) -> CourantVerdict:
    """A null vector of a Yamabe operator with ``nu`` negative eigenvalues has at most ``nu + 1`` domains."""
    count = nodal_domains(u, tol).count
    return CourantVerdict(count <= nu + 1, count, nu + 1)


def cluster_start(eigenvalues: np.ndarray, j: int, rtol: float = 1e-6) -> int:
    """1-based index of the first eigenvalue equal (to ``rtol``) to ``eigenvalues[j-1]``."""
    lam = eigenvalues[j - 1]
    scale = max(1.0, abs(lam))
    i = j
    while i > 1 and abs(eigenvalues[i - 2] - lam) <= rtol * scale:
        i -= 1
    return i


def classical_courant(eigenvalues: np.ndarray, vectors: np.ndarray, shape: tuple[int, ...],
                      j: int) -> CourantVerdict:
    """The ``j``-th eigenfunction has at most ``i`` domains, ``i`` the start of its eigenvalue cluster."""
    bound = cluster_start(eigenvalues, j)
    count = nodal_domains(vectors[:, j - 1].reshape(shape)).count
    return CourantVerdict(count <= bound, count, bound)


@dataclass
class IdentityResult:
    lhs: float
    rhs: float

    @property
    def residual(self) -> float:
        return abs(self.lhs - self.rhs) / (abs(self.lhs) + abs(self.rhs) + 1e-300)

    def to_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "residual": self.residual}


def _boundary_flux(u: np.ndarray, v: np.ndarray, dec: NodalDecomposition, label: int,
                   metric: DiscreteConformalMetric) -> float:
    """``sum over boundary edges of v_mid |d_e u| c_e h``, derivative from inside the domain."""
    g = metric.grid
    flat = u.ravel()
    vf = np.asarray(v, dtype=float).ravel()
    rows = dec.domain_boundary(label)
    if rows.size == 0:
        return 0.0
    inside, outside, axis, step = rows.T
    mask = dec.labels == label
    total = 0.0
    idx = np.arange(g.size).reshape(g.shape)
    cond = [metric.conductances(a) for a in range(g.n)]
    back = [[np.roll(idx, 1, axis=a).ravel(), np.roll(idx, -1, axis=a).ravel()] for a in range(g.n)]
    for i, o, a, s in zip(inside, outside, axis, step):
        # interior neighbour on the far side of i from the crossing
        p = back[a][0][i] if s > 0 else back[a][1][i]
        du = abs(flat[i] - flat[p]) if mask[p] else abs(flat[i] - flat[o])
        lower = i if s > 0 else o
        total += 0.5 * (vf[i] + vf[o]) * du * cond[a][lower]
    return float(total)


def nodal_domain_identity(u: np.ndarray, v: np.ndarray, label: int, metric: DiscreteConformalMetric,
                          operator: SymmetricOperator, decomposition: Optional[NodalDecomposition] = None
                          ) -> IdentityResult:
    """``int_Omega |u| P v dv`` against ``-int_{dOmega} v ||grad u|| dsigma`` for ``u`` in the kernel of ``P``."""
    u = np.asarray(u, dtype=float).reshape(metric.grid.shape)
    dec = nodal_domains(u) if decomposition is None else decomposition
    mask = dec.mask(label)
    pv = operator.matvec(np.asarray(v, dtype=float).ravel())
    lhs = float(np.sum(np.abs(u.ravel()[mask]) * pv[mask] * metric.weights[mask]))
    return IdentityResult(lhs, -_boundary_flux(u, v, dec, label, metric))


def green_identity(u: np.ndarray, v: np.ndarray, metric: DiscreteConformalMetric,
                   operator: SymmetricOperator) -> IdentityResult:
    """``int_M |u| P v dv`` against ``-2 int_{N(u)} v ||grad u|| dsigma`` (summed over domains)."""
    u = np.asarray(u, dtype=float).reshape(metric.grid.shape)
    dec = nodal_domains(u)
    pv = operator.matvec(np.asarray(v, dtype=float).ravel())
    lhs = float(np.sum(np.abs(u.ravel()) * pv * metric.weights))
    rhs = -sum(_boundary_flux(u, v, dec, lab, metric) for lab in range(1, dec.count + 1))
    return IdentityResult(lhs, rhs)


@dataclass
class ObstructionResult:
    value: float
    negative: bool
    f_positive_on_domain: bool
    report: str

    def to_dict(self) -> dict:
        return {"value": self.value, "negative": self.negative,
                "f_positive_on_domain": self.f_positive_on_domain, "report": self.report}


def obstruction_integral(u: np.ndarray, mask: np.ndarray, f: np.ndarray, upsilon,
                         metric: DiscreteConformalMetric) -> ObstructionResult:
    """``int_Omega f |u| omega dv_g`` with ``omega = (n-2)/(4(n-1)) e^{(n+2)U/2}``.

    ``metric`` is the metric ``g`` in which ``u`` is a null vector; when
    ``f`` is the scalar curvature of ``e^{2U} g`` the value is negative.
    """
    n = metric.grid.n
    up = np.asarray(upsilon, dtype=float).ravel()
    mask = np.asarray(mask, dtype=bool).ravel()
    omega = yamabe_constant(n) * np.exp((n + 2) * up / 2)
    fv = np.asarray(f, dtype=float).ravel()
    val = float(np.sum(fv[mask] * np.abs(np.ravel(u)[mask]) * omega[mask] * metric.weights[mask]))
    fpos = bool(np.all(fv[mask] > 0))
    if val < 0:
        report = "negative, consistent with f being a scalar curvature in the conformal class"
    elif fpos:
        report = ("f is positive on the nodal domain, so f is not a conformal scalar curvature "
                  "compatible with this kernel: scalar curvature in the class cannot be everywhere "
                  "positive on a nodal domain of a null vector")
    else:
        report = "nonnegative: f is not the scalar curvature of any metric in the conformal class"
    return ObstructionResult(val, val < 0, fpos, report)


@dataclass
class ConservedT:
    boundary: float
    volume: float

    @property
    def relative_gap(self) -> float:
        return abs(self.boundary - self.volume) / (abs(self.volume) + 1e-300)

    def to_dict(self) -> dict:
        return {"boundary": self.boundary, "volume": self.volume, "relative_gap": self.relative_gap}


def conserved_T(u: np.ndarray, label: int, upsilon, metric: DiscreteConformalMetric,
                decomposition: Optional[NodalDecomposition] = None) -> ConservedT:
    """Boundary form ``-4(n-1)/(n-2) int e^{(2-n)U/2} ||grad u_hat|| dsigma_hat`` and volume form ``int |u| R_g``.

    ``metric`` is the metric ``g`` with ``u`` in its Yamabe kernel and
    ``u_hat = e^{(2-n)U/2} u`` the transformed null vector of ``e^{2U} g``.
    """
    g = metric.grid
    n = g.n
    u = np.asarray(u, dtype=float).reshape(g.shape)
    up = np.asarray(upsilon, dtype=float).reshape(g.shape)
    dec = nodal_domains(u) if decomposition is None else decomposition
    hat = metric.with_factor(metric.upsilon + up)
    u_hat = np.exp((2 - n) * up / 2) * u
    weight = np.exp((2 - n) * up / 2)
    boundary = -4 * (n - 1) / (n - 2) * _boundary_flux(u_hat, weight, dec, label, hat)
    mask = dec.mask(label)
    r = base_scalar_curvature(metric).ravel()
    vol = float(np.sum(np.abs(u.ravel()[mask]) * r[mask] * metric.weights[mask]))
    return ConservedT(float(boundary), vol)


@dataclass
class LevelSet:
    edges: np.ndarray
    sheets: int

    def edge_set(self) -> set:
        return {tuple(e) for e in self.edges.tolist()}


def level_set(u: np.ndarray, c: float) -> LevelSet:
    """Edges on which ``u - c`` changes sign (zero counts as nonnegative).

    ``sheets`` is the number of connected components formed by the
    nonnegative endpoints of those edges.
    """
    u = np.asarray(u, dtype=float)
    up = (u.ravel() - c) >= 0
    edges = _edges(u.shape)
    cross = edges[up[edges[:, 0]] != up[edges[:, 1]]]
    if cross.size == 0:
        return LevelSet(cross.reshape(0, 3), 0)
    nodes = np.zeros(u.size, dtype=bool)
    ends = np.concatenate([cross[:, 0], cross[:, 1]])
    nodes[ends[up[ends]]] = True
    keep = nodes[edges[:, 0]] & nodes[edges[:, 1]]
    graph = sp.coo_matrix((np.ones(int(keep.sum())), (edges[keep, 0], edges[keep, 1])), shape=(u.size, u.size))
    _, comp = connected_components(graph, directed=False)
    return LevelSet(cross, len(np.unique(comp[nodes])))


def lp_invariant(u: np.ndarray, upsilon, n: int, k: int = 1,
                 base_weights: Optional[np.ndarray] = None) -> float:
    """``sum |u_hat|^{2n/(n-2k)} e^{nU} w`` with ``u_hat = e^{-(n-2k)U/2} u``.

    ``u`` is the base representative and ``w`` the base node weights
    (default ``h^n`` for a unit torus with ``u.shape[0]`` nodes per axis).
    """
    if 2 * k >= n:
        raise ValueError("exponent 2n/(n-2k) undefined for k >= n/2")
    u = np.asarray(u, dtype=float).ravel()
    up = np.broadcast_to(np.asarray(upsilon, dtype=float).ravel(), u.shape)
    if base_weights is None:
        N = int(round(u.size ** (1.0 / n)))
        base_weights = np.full(u.size, (1.0 / N) ** n)
    u_hat = np.exp(-(n - 2 * k) * up / 2) * u
    p = 2.0 * n / (n - 2 * k)
    return float(np.sum(np.abs(u_hat) ** p * np.exp(n * up) * base_weights))


def nodal_point_cloud(u: np.ndarray, dec: Optional[NodalDecomposition] = None) -> np.ndarray:
    """Crossing points on boundary edges by linear interpolation; rows ``(x_1..x_n, |du|/h)``."""
    u = np.asarray(u, dtype=float)
    dec = nodal_domains(u) if dec is None else dec
    N = u.shape[0]
    h = 1.0 / N
    flat = u.ravel()
    rows = []
    for i, j, axis in dec.boundary_edges:
        ui, uj = flat[i], flat[j]
        frac = min(max(ui / (ui - uj), 0.0), 1.0) if ui != uj else 0.5
        x = np.array(np.unravel_index(i, u.shape), dtype=float) * h
        x[axis] = (x[axis] + frac * h) % 1.0
        if x[axis] >= 1.0:
            x[axis] = 0.0
        rows.append(np.append(x, abs(ui - uj) / h))
    return np.array(rows) if rows else np.zeros((0, u.ndim + 1))


def point_cloud_csv(points: np.ndarray, columns: Optional[list] = None) -> str:
    """CSV text with a header row; three-dimensional clouds use columns ``x, y, t, value``."""
    dim = points.shape[1] - 1 if points.ndim == 2 else 0
    if columns is None:
        columns = ["x", "y", "t", "value"] if dim == 3 else [f"x{i + 1}" for i in range(dim)] + ["value"]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in points:
        w.writerow([repr(float(v)) for v in row])
    return buf.getvalue()
