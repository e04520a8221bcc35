"""Q-curvature prescription checks on grid metrics.

For ``k = 1`` the Q-curvature is ``Q = 2/(n-2) P_1(1) = R / (2(n-1))``.  A null
vector ``u`` of ``P_1`` pairs to zero with every reachable Q-curvature after a
positive reweighting: if ``g_hat = e^{2U} g`` then

    sum u Q_hat e^{n U'} w = 0,   with  U' = (n+2) U / (2n),

since ``P_g e^{(n-2)U/2} = e^{(n+2)U/2} P_hat 1`` and ``P_g`` is self-adjoint.
A candidate ``s`` with the same (or opposite) strict sign as ``u`` pairs to a
value of fixed sign for every weight, so it is never a Q-curvature.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .conformal import (DiscreteConformalMetric, KernelBasis, TorusGrid, bandlimited_field,
                        scalar_curvature_conformal, weighted_norm, yamabe_conjugated, yamabe_direct)

FORBIDDEN = "FORBIDDEN"
NOT_DECIDED = "NOT-DECIDED"
OBSTRUCTED = "OBSTRUCTED"
NOT_OBSTRUCTED = "NOT-OBSTRUCTED"

#: Relative tolerance for strict-sign comparisons.
SIGN_TOLERANCE = 1e-6


@dataclass
class Verdict:
    verdict: str
    witness: dict = field(default_factory=dict)
    margins: dict = field(default_factory=dict)
    probes_used: int = 0
    tolerances: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def q_curvature(metric: DiscreteConformalMetric, k: int = 1, path: str = "direct") -> np.ndarray:
    """``2/(n-2) P_1(1)`` at every node (flat array).

    ``path="direct"`` applies the operator assembled from ``g_hat``;
    ``path="conjugated"`` applies ``e^{-(n+2)U/2} P_g e^{(n-2)U/2}``.
    """
    if k != 1:
        raise ValueError("only k = 1 is discretized")
    n = metric.grid.n
    if path == "direct":
        op = yamabe_direct(metric)
    elif path == "conjugated":
        op = yamabe_conjugated(metric.upsilon, metric.grid, metric.base)
    else:
        raise ValueError(f"unknown path {path!r}")
    return 2.0 / (n - 2) * op.matvec(np.ones(metric.grid.size))


def q_from_scalar(metric: DiscreteConformalMetric) -> np.ndarray:
    """``R_hat / (2(n-1))`` (flat array)."""
    n = metric.grid.n
    return scalar_curvature_conformal(metric.upsilon, metric.grid, metric.base).ravel() / (2 * (n - 1))


def q_curvature_heisenberg(model) -> float:
    """Constant ``Q_1 = R / (2(n-1)) = -(d/2) s^{2d+2} / (4d)`` of the Heisenberg metric ``g_s``."""
    from .heisenberg.spectrum import scalar_curvature

    return scalar_curvature(model) / (2.0 * (model.dimension - 1))


def matched_factor(upsilon, n: int, k: int = 1) -> np.ndarray:
    """``U' = (n+2k) U / (2n)``: the pairing weight that annihilates ``Q`` of ``e^{2U} g``."""
    return (n + 2 * k) * np.asarray(upsilon, dtype=float) / (2.0 * n)


def constraint_functional(u: np.ndarray, v: np.ndarray, upsilon_prime, base_weights: np.ndarray,
                          n: int = 3) -> float:
    """``sum u v e^{n U'} w`` with ``w`` the base node weights."""
    u = np.ravel(u)
    if u.shape != np.shape(base_weights):
        raise ValueError("u and weights differ in length")
    up = np.broadcast_to(np.ravel(np.asarray(upsilon_prime, dtype=float)), u.shape)
    return float(np.sum(u * np.ravel(v) * np.exp(n * up) * base_weights))


def probe_factors(grid: TorusGrid, count: int = 20, amplitude: float = 0.5, seed: int = 100) -> list[np.ndarray]:
    """Seeded bandlimited conformal factors used as pairing weights."""
    return [bandlimited_field(grid, seed + i, amplitude) for i in range(count)]


def strict_sign(u: np.ndarray, s: np.ndarray, tol: float = SIGN_TOLERANCE) -> int:
    """``+1`` if ``s u > 0`` wherever ``|u| > tol ||u||``, ``-1`` for ``s u < 0`` there, else ``0``."""
    u = np.ravel(u)
    s = np.ravel(s)
    keep = np.abs(u) > tol * np.abs(u).max()
    prod = np.sign(u[keep]) * np.sign(s[keep])
    if np.all(prod > 0):
        return 1
    if np.all(prod < 0):
        return -1
    return 0


def forbidden_function_test(u: np.ndarray, s_u: np.ndarray, probes: Sequence[np.ndarray],
                            base_weights: np.ndarray, n: int = 3, tol: float = SIGN_TOLERANCE) -> Verdict:
    """FORBIDDEN when ``s_u`` shares (or opposes) the strict sign of ``u``.

    The witness lists the pairing ``sum u s_u e^{n U'} w`` for every probe
    weight; all carry the same sign, bounded away from zero by the reported
    margin, whereas a Q-curvature would pair to zero for a matched weight.
    """
    u = np.ravel(np.asarray(u, dtype=float))
    if not np.any(np.abs(u) > 0):
        raise ValueError("u is numerically zero")
    sigma = strict_sign(u, s_u, tol)
    tolerances = {"sign": tol, "absolute": tol * float(np.abs(u).max())}
    if sigma == 0:
        return Verdict(NOT_DECIDED, {"reason": "s_u is sign-indefinite relative to u"}, {}, 0, tolerances)
    values = []
    for p in probes:
        up = np.ravel(p)
        values.append(float(np.sum(u * np.ravel(s_u) * np.exp(n * up) * base_weights)))
    oriented = sigma * np.array(values)
    margin = float(oriented.min()) if values else math.inf
    verdict = FORBIDDEN if margin > 0 else NOT_DECIDED
    return Verdict(verdict, {"orientation": sigma, "probe_integrals": values},
                   {"min_oriented_integral": margin}, len(values), tolerances)


def membership_probe(kernel_vectors: np.ndarray, v: np.ndarray, probes: Sequence[np.ndarray],
                     base_weights: np.ndarray, n: int = 3) -> Verdict:
    """Probe-based check of the pairing constraint for every kernel basis vector.

    For each basis vector the pairings with ``v`` over the probe weights are
    computed.  A sign change between two probes means some weight on the
    path between them pairs to zero.  If every basis vector shows a sign
    change, ``v`` is "not excluded by probes"; otherwise it is "excluded by
    probes" (a heuristic: finitely many probes cannot certify exclusion unless
    the pointwise sign criterion holds, which is reported separately).
    """
    vecs = np.atleast_2d(np.asarray(kernel_vectors, dtype=float).T).T
    crossing, certified, table = [], [], []
    for u in vecs.T:
        vals = [float(np.sum(u * np.ravel(v) * np.exp(n * np.ravel(p)) * base_weights)) for p in probes]
        table.append(vals)
        crossing.append(bool(min(vals) <= 0 <= max(vals)))
        certified.append(strict_sign(u, v) != 0)
    if any(certified):
        verdict = "excluded (pointwise sign criterion)"
    elif all(crossing):
        verdict = "not excluded by probes"
    else:
        verdict = "excluded by probes"
    return Verdict(verdict, {"probe_integrals": table, "sign_change": crossing, "certified": certified},
                   {}, len(probes), {"sign": SIGN_TOLERANCE})


def _candidates(kernel: KernelBasis, samples: int, seed: int):
    vecs = kernel.vectors
    for i in range(vecs.shape[1]):
        yield vecs[:, i]
    if vecs.shape[1] > 1:
        rng = np.random.default_rng(seed)
        for _ in range(samples):
            c = rng.standard_normal(vecs.shape[1])
            yield vecs @ (c / np.linalg.norm(c))


def constant_q_obstruction(kernel: KernelBasis, tol: float = SIGN_TOLERANCE, samples: int = 100,
                           seed: int = 0) -> Verdict:
    """OBSTRUCTED when the kernel holds a numerically single-signed vector.

    Scans the basis and ``samples`` random unit combinations for ``u`` with
    ``min(u) max(u) >= -tol ||u||_inf^2``; such ``u`` rules out every nonzero
    constant Q-curvature in the conformal class.
    """
    tried = 0
    for u in _candidates(kernel, samples, seed):
        tried += 1
        peak = float(np.abs(u).max())
        if peak == 0:
            continue
        if float(u.min()) * float(u.max()) >= -tol * peak ** 2:
            return Verdict(OBSTRUCTED, {"vector": u.tolist(), "min": float(u.min()), "max": float(u.max())},
                           {"min_times_max": float(u.min() * u.max())}, tried, {"sign": tol})
    return Verdict(NOT_OBSTRUCTED, {}, {}, tried, {"sign": tol})


def nowhere_vanishing_kernel_check(kernel: KernelBasis, metric: DiscreteConformalMetric,
                                   tol: float = SIGN_TOLERANCE, samples: int = 100, seed: int = 0) -> dict:
    """Search the kernel for a nowhere-vanishing ``u``; if found, rescale to ``Q = 0``.

    With ``u > 0`` scaled to ``max u = 1`` the factor ``U = 2/(n-2) log u``
    gives ``e^{2U} g`` whose Yamabe operator annihilates constants; the
    report gives ``||Q||_inf`` on both the conjugated and the directly
    assembled operator.
    """
    n = metric.grid.n
    for u in _candidates(kernel, samples, seed):
        peak = float(np.abs(u).max())
        if peak == 0 or float(np.abs(u).min()) <= tol * peak:
            continue
        if not (np.all(u > 0) or np.all(u < 0)):
            continue
        pos = np.abs(u) / peak
        factor = 2.0 / (n - 2) * np.log(pos).reshape(metric.grid.shape)
        hat = metric.with_factor(metric.upsilon + factor)
        q_conj = q_curvature(hat, path="conjugated")
        q_dir = q_curvature(hat, path="direct")
        return {"found": True, "upsilon_max": float(np.abs(factor).max()),
                "q_conjugated_max": float(np.abs(q_conj).max()),
                "q_direct_max": float(np.abs(q_dir).max()), "factor": factor.ravel().tolist()}
    return {"found": False, "report": "no nowhere-vanishing element found in probe set"}


def prescription_pde_residual(u: np.ndarray, metric: DiscreteConformalMetric, q_hat: np.ndarray,
                              k: int = 1) -> float:
    """``||P_1 u - (n-2)/2 Q_hat u^{(n+2)/(n-2)}|| / ||u||`` in the weights of ``metric``."""
    if k != 1:
        raise ValueError("only k = 1 is discretized")
    u = np.ravel(np.asarray(u, dtype=float))
    if not np.all(u > 0):
        raise ValueError("u must be strictly positive")
    n = metric.grid.n
    op = yamabe_direct(metric)
    r = op.matvec(u) - (n - 2) / 2.0 * np.ravel(q_hat) * u ** ((n + 2.0) / (n - 2))
    w = metric.weights
    return weighted_norm(r, w) / weighted_norm(u, w)
