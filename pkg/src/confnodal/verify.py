"""Conformal-invariance checks on a seeded family of grid metrics.

Every family member ``e^{2U_i} g`` gets the conjugated Yamabe operator
``e^{-(n+2)U_i/2} P_g e^{(n-2)U_i/2}``, which is congruent to ``P_g``.  The
checks compare, across the family, the negative count, the sign of the
lowest eigenvalue, the kernel dimension, the ``L^{2n/(n-2)}`` norm of the
transformed null vector and the nodal partition of computed null vectors.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .conformal import (DiscreteConformalMetric, FamilySpec, SymmetricOperator, TorusGrid,
                        covariance_residual, density_transform, kernel_basis, lowest_modes,
                        tuned_kernel_example, yamabe_conjugated, yamabe_constant)
from .linalg import inertia_count
from .nodal import default_tolerance, isomorphic, lp_invariant, nodal_domains


@dataclass
class Check:
    name: str
    passed: bool
    values: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "values": self.values}


def negative_below(op: SymmetricOperator, tau: float) -> int:
    """Eigenvalues below ``-tau``, by the inertia of ``S + tau I`` (Sylvester)."""
    return inertia_count(op, sigma=-tau, zero_tol=0.0)[0]


def _bugged_conjugated(upsilon, grid: TorusGrid, base, null_metric: DiscreteConformalMetric) -> SymmetricOperator:
    # negative control: the curvature weight enters with the wrong sign
    n = grid.n
    op = yamabe_conjugated(upsilon, grid, base)
    from .conformal import scalar_curvature_conformal

    r = scalar_curvature_conformal(None, grid, base).ravel()
    up = np.ravel(upsilon)
    fix = sp.diags(-2 * yamabe_constant(n) * r * np.exp(-2 * up))
    return SymmetricOperator(op.matrix + fix, op.weights)


def conformal_invariance_suite(N: int = 16, n: int = 3, family: FamilySpec = FamilySpec(),
                               inject_bug: bool = False, refine: bool = False,
                               flat_base: bool = False) -> dict:
    """Run the invariance checks; ``report["passed"]`` is the conjunction of all checks.

    The base is the warped metric tuned to a null eigenvalue (``nu = 1``)
    unless ``flat_base`` is set.
    """
    t0 = time.perf_counter()
    grid = TorusGrid(n, N)
    if flat_base:
        base = None
        metric0 = DiscreteConformalMetric(grid, None)
        u0 = np.ones(grid.size)
        tune_info = None
    else:
        tk = tuned_kernel_example(N, n)
        base, metric0, u0 = tk.metric.base, tk.metric, tk.null_vector
        tune_info = tk.tune.to_dict()
    op0 = yamabe_conjugated(None, grid, base)
    tau = op0.zero_tolerance()
    factors = [f.values for f in family.factors(grid)]
    w0 = metric0.base_weights
    lp0 = lp_invariant(u0, np.zeros(grid.size), n, 1, w0)
    dec0 = nodal_domains(u0.reshape(grid.shape))
    eig0 = lowest_modes(op0, 4)
    rows = []
    for i, up in enumerate(factors):
        if inject_bug and i == len(factors) - 1:
            op = _bugged_conjugated(up, grid, base, metric0)
        else:
            op = yamabe_conjugated(up, grid, base)
        # congruence S_U = e^{-U} S_0 e^{-U} bounds the spectrum from below
        bound = min(0.0, float(eig0.eigenvalues[0])) * float(np.exp(-2 * up).max()) * 1.1
        eig = lowest_modes(op, 4, lower_bound=bound)
        kb = kernel_basis(op, tau, eig=eig)
        nu = negative_below(op, tau)
        lp = lp_invariant(u0, up, n, 1, w0)
        expected = density_transform(u0, up.ravel(), (n - 2) / 2.0)
        sign_equal = None
        iso = None
        if kb.dimension == 1:
            v = kb.vectors[:, 0]
            # nodes where the exact vector is zero carry only roundoff in v
            keep = np.abs(expected) > default_tolerance(expected)
            sv, se = np.sign(v[keep]), np.sign(expected[keep])
            sign_equal = bool(np.array_equal(sv, se) or np.array_equal(sv, -se))
            iso = isomorphic(nodal_domains(v.reshape(grid.shape)), dec0)
        rows.append({"factor": i, "seed": family.seed + i, "nu": nu,
                     "lambda1": float(eig.eigenvalues[0]), "lambda1_sign": int(np.sign(eig.eigenvalues[0])),
                     "kernel_dimension": kb.dimension, "kernel_eigenvalues": kb.eigenvalues.tolist(),
                     "lp_invariant": lp, "lp_relative_change": abs(lp - lp0) / lp0,
                     "nodal_signs_equal": sign_equal, "nodal_partition_equal": iso})
    nu_base = negative_below(op0, tau)
    dim0 = kernel_basis(op0, tau, eig=eig0).dimension
    sign0 = int(np.sign(eig0.eigenvalues[0])) if abs(eig0.eigenvalues[0]) > tau else 0
    checks = [
        Check("nu_invariant", all(r["nu"] == nu_base for r in rows),
              {"base": nu_base, "family": [r["nu"] for r in rows]}),
        Check("lambda1_sign_invariant",
              all((r["lambda1_sign"] if abs(r["lambda1"]) > tau else 0) == sign0 for r in rows),
              {"base": sign0, "family": [r["lambda1"] for r in rows]}),
        Check("kernel_dimension_invariant", all(r["kernel_dimension"] == dim0 for r in rows),
              {"base": dim0, "family": [r["kernel_dimension"] for r in rows], "tau": tau}),
        Check("lp_invariant_constant", all(r["lp_relative_change"] <= 1e-10 for r in rows),
              {"base": lp0, "relative_changes": [r["lp_relative_change"] for r in rows]}),
        Check("nodal_signs_invariant", all(r["nodal_signs_equal"] and r["nodal_partition_equal"] for r in rows),
              {"sign_equal": [r["nodal_signs_equal"] for r in rows],
               "partition_equal": [r["nodal_partition_equal"] for r in rows], "base_domains": dec0.count}),
    ]
    report = {"N": N, "n": n, "base": "flat" if flat_base else "tuned-warped", "tuning": tune_info,
              "family": {"seed": family.seed, "amplitude": family.amplitude, "count": family.count},
              "zero_tolerance": tau, "inject_bug": inject_bug, "members": rows,
              "checks": [c.to_dict() for c in checks]}
    if refine:
        fits = []
        for up_seed in range(family.seed, family.seed + min(family.count, 3)):
            vals = []
            for m in (N, 2 * N):
                g = TorusGrid(n, m)
                f = FamilySpec(up_seed, family.amplitude, 1).factors(g)[0]
                vals.append(covariance_residual(f.values, g))
            fits.append({"seed": up_seed, "residuals": vals, "ratio": vals[0] / vals[1],
                         "order": math.log2(vals[0] / vals[1])})
        ok = all(2.5 <= f["ratio"] <= 6.0 for f in fits)
        report["covariance_refinement"] = fits
        checks.append(Check("covariance_order", ok, {"ratios": [f["ratio"] for f in fits]}))
        report["checks"] = [c.to_dict() for c in checks]
    failed = [c.name for c in checks if not c.passed]
    report["failed"] = failed
    report["passed"] = not failed
    report["elapsed_seconds"] = time.perf_counter() - t0
    return report
