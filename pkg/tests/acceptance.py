"""The eleven acceptance criteria as plain functions.

Each returns ``(passed, detail)``; ``python tests/acceptance.py`` prints one
line per criterion and the pytest wrapper asserts them.
"""

from __future__ import annotations

import math
import time
from fractions import Fraction

import numpy as np
import sympy

from confnodal.conformal import (DiscreteConformalMetric, FamilySpec, TorusGrid, bandlimited_field,
                                 covariance_residual, kernel_basis, scalar_curvature_conformal,
                                 separable_spectrum, tuned_kernel_example, yamabe_direct)
from confnodal.einstein import sign_table
from confnodal.heisenberg import (HeisenbergModel, HermiteFamily, HermiteLabel, count_negative, fit_slope,
                                  lowest_nonzero, paneitz_constants, spectrum_lines, yamabe_eigenvalue,
                                  yamabe_null_parameter)
from confnodal.heisenberg.eigenfunctions import (eigenfunction_value, nodal_set_hermite_ground,
                                                 sample_far_points, sample_nodal_points)
from confnodal.heisenberg.grid import twisted_grid_lowest
from confnodal.nodal import (classical_courant, courant_check, green_identity, nodal_domain_identity,
                             nodal_domains, obstruction_integral)
from confnodal.prescription import (FORBIDDEN, OBSTRUCTED, constant_q_obstruction, forbidden_function_test,
                                    probe_factors)
from confnodal.special import jacobi_theta, jacobi_theta_triple_product
from confnodal.verify import conformal_invariance_suite


def timed(limit):
    def wrap(fn):
        def inner():
            t0 = time.perf_counter()
            ok, detail = fn()
            elapsed = time.perf_counter() - t0
            detail["elapsed_seconds"] = round(elapsed, 2)
            detail["time_limit"] = limit
            return ok and elapsed <= limit, detail
        inner.__name__ = fn.__name__
        inner.__doc__ = fn.__doc__
        return inner
    return wrap


@timed(60)
def heisenberg_grid_cross_validation():
    """Twisted-grid Laplacian vs closed form, d=1, r=(1), s=1."""
    m = HeisenbergModel(1, (1,), 1.0)
    exact = lowest_nonzero(spectrum_lines(m, "laplacian", 200.0), 10)
    errs = {}
    for N in (32, 64):
        grid = twisted_grid_lowest(m, N, 11)[1:]
        errs[N] = np.abs(grid - exact) / exact
    contraction = errs[32].max() / errs[64].max()
    ok = bool(np.all(errs[32] <= 0.02) and contraction >= 3)
    return ok, {"max_rel_error_32": float(errs[32].max()), "max_rel_error_64": float(errs[64].max()),
                "contraction": float(contraction)}


@timed(1)
def null_parameter_exactness():
    worst = 0.0
    for d in (1, 2, 3):
        for n in range(-3, 4):
            if n == 0:
                continue
            for level in range(3):
                s = yamabe_null_parameter(d, n, level)
                val = yamabe_eigenvalue(HeisenbergModel(d, (1,) * d, s), HermiteFamily(n, level))
                worst = max(worst, abs(val) / s ** (2 * d + 2))
    return worst < 1e-10, {"max_scaled_residual": worst}


@timed(120)
def nu_growth_law():
    out = {}
    ok = True
    for d, op, lo, hi, target in ((1, "yamabe", 8, 64, 4), (2, "paneitz", 4, 32, 6)):
        s = np.geomspace(lo, hi, 12)
        counts = [count_negative(HeisenbergModel(d, (1,) * d, float(x)), op).total for x in s]
        slope = fit_slope(s, counts)
        out[f"d{d}_{op}"] = {"slope": slope, "target": target, "counts": counts}
        ok &= abs(slope - target) <= 0.3
    return ok, out


@timed(5)
def theta_nodal_sets():
    s0 = (8 * math.pi * (2 + math.sqrt(5))) ** (1 / 3)
    model = HeisenbergModel(1, (1,), s0)
    pieces = nodal_set_hermite_ground(model)
    lab = HermiteLabel(1, (0,))
    on = np.abs(eigenfunction_value(model, lab, sample_nodal_points(model, pieces, 64, seed=1), method="theta"))
    off = np.abs(eigenfunction_value(model, lab, sample_far_points(model, pieces, 64, 0.1, seed=2),
                                     method="theta"))
    rng = np.random.default_rng(3)
    s = rng.uniform(0.5, 4.0, 100)
    z = rng.uniform(-1, 1, 100) + 1j * rng.uniform(-1, 1, 100) * s
    series = np.array([jacobi_theta(zz, 1j * ss) for zz, ss in zip(z, s)])
    product = np.array([jacobi_theta_triple_product(zz, ss) for zz, ss in zip(z, s)])
    gap = float(np.max(np.abs(series - product) / np.maximum(1.0, np.abs(series))))
    ok = bool(on.max() < 1e-8 and off.min() > 1e-3 and gap < 1e-10)
    return ok, {"max_on_nodal_set": float(on.max()), "min_away": float(off.min()), "theta_gap": gap}


@timed(1)
def paneitz_constants_check():
    d = sympy.symbols("d")
    c0 = (2 * d - 3) * ((2 * d + 1) * (2 * d - 1) ** 2 - 4 * (16 * d ** 2 + 18 * d + 1)) / (256 * (2 * d - 1) ** 2)
    c1 = ((2 * d - 1) ** 2 - 12) / (8 * (2 * d - 1))
    ok = True
    reports = []
    for k in range(1, 11):
        pc = paneitz_constants(k)
        ok &= pc.c0 == Fraction(str(sympy.nsimplify(c0.subs(d, k))))
        ok &= pc.c1 == Fraction(str(sympy.nsimplify(c1.subs(d, k))))
        rep = pc.report()
        reports.append(rep)
        if k >= 2:
            ok &= pc.delta0 > 0 and "closed_form_discrepancy" in rep
    return bool(ok), {"discrepancies": [r["closed_form_discrepancy"] for r in reports]}


@timed(120)
def conformal_invariance():
    rep = conformal_invariance_suite(16, 3, FamilySpec(0, 0.5, 5))
    return rep["passed"], {"failed": rep["failed"], "nu": [m["nu"] for m in rep["members"]]}


@timed(180)
def covariance_convergence():
    ratios = []
    for seed in (0, 1, 2):
        vals = []
        for N in (16, 32):
            g = TorusGrid(3, N)
            vals.append(covariance_residual(FamilySpec(seed, 0.5, 1).factors(g)[0].values, g))
        ratios.append(vals[0] / vals[1])
    return all(2.5 <= r <= 6.0 for r in ratios), {"ratios": ratios}


@timed(120)
def courant_bound():
    tk = tuned_kernel_example(16)
    v = courant_check(tk.null_vector.reshape(tk.metric.grid.shape), tk.nu)
    flat = DiscreteConformalMetric(TorusGrid(3, 16), None)
    spec = separable_spectrum(flat, 11)
    vecs = spec.vectors()
    proxy = [classical_courant(spec.eigenvalues, vecs, flat.grid.shape, j) for j in range(1, 11)]
    ok = tk.nu >= 1 and v.passed and all(p.passed for p in proxy)
    return ok, {"nu": tk.nu, "domains": v.count, "classical": [(p.count, p.bound) for p in proxy]}


@timed(180)
def nodal_identity():
    res = {}
    for N in (32, 64):
        tk = tuned_kernel_example(N)
        g = tk.metric.grid
        u = tk.null_vector
        dec = nodal_domains(u.reshape(g.shape))
        vs = {"one": np.ones(g.size), "smooth": np.exp(bandlimited_field(g, 7, 0.5)).ravel()}
        for name, v in vs.items():
            dom = max(nodal_domain_identity(u, v, k, tk.metric, tk.operator, dec).residual
                      for k in range(1, dec.count + 1))
            res[(N, name)] = (dom, green_identity(u, v, tk.metric, tk.operator).residual)
    ok = all(max(res[(32, v)]) <= 0.15 for v in ("one", "smooth"))
    ok &= all(res[(64, v)][i] < res[(32, v)][i] for v in ("one", "smooth") for i in (0, 1))
    return ok, {f"N{N}_{v}": r for (N, v), r in res.items()}


@timed(60)
def prescription_obstructions():
    tk = tuned_kernel_example(32)
    g = tk.metric.grid
    u = tk.null_vector
    fv = forbidden_function_test(u, u, probe_factors(g, 20), tk.metric.base_weights)
    flat = DiscreteConformalMetric(TorusGrid(3, 16), None)
    cq = constant_q_obstruction(kernel_basis(yamabe_direct(flat)))
    dec = nodal_domains(u.reshape(g.shape))
    up = bandlimited_field(g, 1, 0.5)
    f = scalar_curvature_conformal(up, g, tk.metric.base)
    vals = [obstruction_integral(u, dec.mask(k), f, up, tk.metric).value for k in range(1, dec.count + 1)]
    margin = fv.margins.get("min_oriented_integral", -1.0)
    ok = fv.verdict == FORBIDDEN and fv.probes_used == 20 and margin > 0 and cq.verdict == OBSTRUCTED
    ok &= all(v < 0 for v in vals)
    return ok, {"forbidden": fv.verdict, "margin": margin, "constant_q": cq.verdict, "obstruction": vals}


@timed(5)
def einstein_sign_table():
    violations = []
    for n in (5, 7, 9, 11):
        for k in range(1, (n - 1) // 2 + 1, 2):
            t = sign_table(n, [k], 100)[k]
            if t["negative"] != 100:
                violations.append(("odd", n, k))
    for n in (8, 9, 12, 13):
        for k in range(math.ceil(n / 2), math.ceil(n / 2) + 4):
            t = sign_table(n, [k], 100)[k]
            if t["negative"] != 100:
                violations.append(("extended", n, k))
    return not violations, {"violations": violations}


CRITERIA = [
    (1, "heisenberg grid cross-validation", heisenberg_grid_cross_validation),
    (2, "null-parameter exactness", null_parameter_exactness),
    (3, "nu growth law", nu_growth_law),
    (4, "theta nodal sets", theta_nodal_sets),
    (5, "paneitz constants", paneitz_constants_check),
    (6, "conformal invariance suite", conformal_invariance),
    (7, "covariance convergence", covariance_convergence),
    (8, "courant bound", courant_bound),
    (9, "nodal-domain identity", nodal_identity),
    (10, "prescription obstructions", prescription_obstructions),
    (11, "einstein product sign table", einstein_sign_table),
]


def line(number, title, ok, detail) -> str:
    return f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}  {detail}"


if __name__ == "__main__":
    for number, title, fn in CRITERIA:
        print(line(number, title, *fn()), flush=True)
