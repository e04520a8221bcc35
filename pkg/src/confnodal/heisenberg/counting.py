"""Exact negative-eigenvalue counts for the Yamabe and Paneitz operators.

Both operators are diagonal in the character / Hermite eigenbasis, so the
count with multiplicity is a lattice-point problem.

Finiteness of the enumeration:

* A character contributes only if its Laplacian eigenvalue
  ``4 pi^2 (|xi|^2 + s^2 |eta|^2)`` lies in a bounded window ``(lo, hi)``, so
  ``|xi| < sqrt(hi) / 2 pi`` and ``|eta| < sqrt(hi) / (2 pi s)``.
* A Hermite family ``(n, |alpha|)`` has Laplacian eigenvalue at least
  ``4 pi^2 n^2 s^{-2d} + 2 pi |n| s d``, quadratic in ``|n|``, while the
  window's upper end grows at most linearly in ``|n|`` (Yamabe: constant).
  This bounds ``|n|``; for fixed ``n`` the eigenvalue is increasing in
  ``|alpha|``, which bounds the level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .model import CharacterLabel, HeisenbergModel, HermiteFamily
from .spectrum import (paneitz_constants, paneitz_eigenvalue,
                       yamabe_eigenvalue, yamabe_shift)

_FOUR_PI2 = 4 * math.pi ** 2


@dataclass
class NegativeCount:
    """Count of negative eigenvalues with a compressed certificate.

    ``hermite`` lists, for each ``|n|``, the range of levels ``a`` whose
    families ``(+-n, a)`` are negative.  ``characters`` rows are
    ``(nu_1, ..., nu_d, count)``: ``count`` values of ``xi`` pair with that
    ``nu`` to give a negative character.
    """

    operator: str
    model: HeisenbergModel
    total: int
    hermite_total: int
    character_total: int
    hermite: "HermiteCertificate" = field(repr=False)
    characters: np.ndarray = field(repr=False)

    def hermite_labels(self) -> Iterator[tuple[HermiteFamily, int]]:
        for n, lo, hi in self.hermite:
            for a in range(lo, hi + 1):
                fam = HermiteFamily(int(n), a)
                yield fam, fam.multiplicity(self.model)

    def character_labels(self, window: tuple[float, float]) -> Iterator[CharacterLabel]:
        """Expand the character shells (only sensible for small counts)."""
        lo, hi = window
        d = self.model.d
        for row in self.characters:
            nu = tuple(int(v) for v in row[:d])
            eta2 = sum((v / rj) ** 2 for v, rj in zip(nu, self.model.r))
            k = int(math.isqrt(int(hi / _FOUR_PI2) + 1)) + 1
            for xi in np.ndindex(*(2 * k + 1,) * d):
                x = tuple(int(v) - k for v in xi)
                lap = _FOUR_PI2 * (sum(v * v for v in x) + self.model.s ** 2 * eta2)
                if lo < lap < hi:
                    yield CharacterLabel(x, nu)

    def to_dict(self) -> dict:
        return {
            "operator": self.operator, "d": self.model.d, "r": list(self.model.r), "s": self.model.s,
            "total": int(self.total), "hermite_total": int(self.hermite_total),
            "character_total": int(self.character_total),
            "hermite_families": [[n, lo, hi] for n, lo, hi in self.hermite],
            "character_shells": [[int(v) for v in row] for row in self.characters],
        }


# ---------------------------------------------------------------------------
# lattice point helpers
# ---------------------------------------------------------------------------

def _isqrt_below(x: np.ndarray) -> np.ndarray:
    """Largest integer ``k >= 0`` with ``k^2 < x`` (``-1`` where ``x <= 0``)."""
    k = np.floor(np.sqrt(np.maximum(x, 0.0))).astype(np.int64)
    k = np.where(k * k >= x, k - 1, k)
    k = np.where((k + 1) * (k + 1) < x, k + 1, k)
    return np.where(x > 0, k, -1)


def _isqrt_at_most(x: np.ndarray) -> np.ndarray:
    """Largest integer ``k >= 0`` with ``k^2 <= x`` (``-1`` where ``x < 0``)."""
    k = np.floor(np.sqrt(np.maximum(x, 0.0))).astype(np.int64)
    k = np.where(k * k > x, k - 1, k)
    k = np.where((k + 1) * (k + 1) <= x, k + 1, k)
    return np.where(x >= 0, k, -1)


def ball_count(d: int, rho2, strict: bool = True) -> np.ndarray:
    """Number of ``xi`` in ``Z^d`` with ``|xi|^2 < rho2`` (or ``<=``), vectorized."""
    rho2 = np.asarray(rho2, dtype=float)
    if d == 1:
        k = _isqrt_below(rho2) if strict else _isqrt_at_most(rho2)
        return np.where(k >= 0, 2 * k + 1, 0).astype(np.int64)
    kmax = int(math.floor(math.sqrt(max(float(rho2.max(initial=0.0)), 0.0)))) + 1
    total = np.zeros(rho2.shape, dtype=np.int64)
    for x in range(-kmax, kmax + 1):
        rest = rho2 - x * x
        if np.all(rest < 0):
            continue
        total += ball_count(d - 1, rest, strict)
    return total


def _eta_points(model: HeisenbergModel, eta2_max: float) -> tuple[np.ndarray, np.ndarray]:
    """All ``nu`` with ``sum (nu_j / r_j)^2 < eta2_max`` and the values of ``|eta|^2``."""
    if eta2_max <= 0:
        return np.zeros((0, model.d), dtype=np.int64), np.zeros(0)
    ranges = [np.arange(-int(math.floor(math.sqrt(eta2_max) * rj)) - 1,
                        int(math.floor(math.sqrt(eta2_max) * rj)) + 2) for rj in model.r]
    grids = np.meshgrid(*ranges, indexing="ij")
    nu = np.stack([g.ravel() for g in grids], axis=1)
    eta2 = sum((nu[:, j] / model.r[j]) ** 2 for j in range(model.d))
    keep = eta2 < eta2_max
    return nu[keep], eta2[keep]


def _character_shells(model: HeisenbergModel, lo: float, hi: float) -> tuple[np.ndarray, int]:
    """Characters with Laplacian eigenvalue strictly inside ``(lo, hi)``."""
    d, s = model.d, model.s
    if hi <= 0 or hi <= lo:
        return np.zeros((0, d + 1), dtype=np.int64), 0
    hi2 = hi / _FOUR_PI2
    lo2 = lo / _FOUR_PI2
    nu, eta2 = _eta_points(model, hi2 / (s * s))
    if nu.shape[0] == 0:
        return np.zeros((0, d + 1), dtype=np.int64), 0
    counts = np.zeros(nu.shape[0], dtype=np.int64)
    chunk = 4096
    for i in range(0, nu.shape[0], chunk):
        e = eta2[i:i + chunk] * s * s
        inner = ball_count(d, hi2 - e, strict=True)
        outer = ball_count(d, lo2 - e, strict=False) if lo2 >= 0 else 0
        counts[i:i + chunk] = inner - outer
    keep = counts > 0
    shells = np.column_stack([nu[keep], counts[keep]])
    return shells, int(counts.sum())


def _comb_int64(a: np.ndarray, d: int) -> np.ndarray:
    """``binom(a + d, d)`` in int64 (0 for ``a < 0``); caller guards overflow."""
    a = np.asarray(a, dtype=np.int64)
    c = np.ones_like(a)
    for j in range(1, d + 1):
        c = c * (a + j) // j
    return np.where(a >= 0, c, 0)


def _exact_sum(values_float: np.ndarray, compute_int) -> int:
    """Exact sum of integer terms, in int64 chunks when safe, else Python ints."""
    total = 0
    n = values_float.size
    chunk = 65536
    for i in range(0, n, chunk):
        est = float(np.sum(values_float[i:i + chunk]))
        terms = compute_int(slice(i, i + chunk), est < 4e18)
        total += int(terms.sum()) if terms.dtype != object else sum(terms.tolist())
    return total


@dataclass
class HermiteCertificate:
    """Negative Hermite families: for each ``|n|`` in ``n_abs`` the levels
    ``level_lo..level_hi`` are negative, for both signs of ``n``."""

    n_abs: np.ndarray
    level_lo: np.ndarray
    level_hi: np.ndarray

    def __iter__(self):
        for m, lo, hi in zip(self.n_abs.tolist(), self.level_lo.tolist(), self.level_hi.tolist()):
            for sign in (1, -1):
                yield sign * m, lo, hi

    def __len__(self):
        return 2 * self.n_abs.size


def _hermite_rows(model: HeisenbergModel, n_values: np.ndarray, lo: np.ndarray, hi: np.ndarray):
    """Certificate and exact total for levels ``lo..hi`` at each ``|n|``, both signs."""
    d, vol = model.d, model.volume
    keep = hi >= lo
    n_values, lo, hi = n_values[keep], lo[keep], hi[keep]
    cert = HermiteCertificate(n_values, lo, hi)
    if n_values.size == 0:
        return cert, 0
    mf = n_values.astype(float)

    def comb_float(a):
        out = np.ones_like(a, dtype=float)
        for j in range(1, d + 1):
            out *= (a + j) / j
        return np.where(a >= 0, out, 0.0)

    est = 2.0 * vol * mf ** d * (comb_float(hi.astype(float)) - comb_float(lo.astype(float) - 1))

    def compute(sl, small):
        m = n_values[sl]
        if small:
            return 2 * vol * m ** d * (_comb_int64(hi[sl], d) - _comb_int64(lo[sl] - 1, d))
        out = []
        for mm, a, b in zip(m.tolist(), lo[sl].tolist(), hi[sl].tolist()):
            low = math.comb(a - 1 + d, d) if a >= 1 else 0
            out.append(2 * vol * mm ** d * (math.comb(b + d, d) - low))
        return np.array(out, dtype=object)

    return cert, _exact_sum(est, compute)


def _level_of(model: HeisenbergModel, m: np.ndarray, lap: np.ndarray) -> np.ndarray:
    """Real level ``a`` at which the Hermite Laplacian eigenvalue equals ``lap``."""
    s, d = model.s, model.d
    return ((lap - _FOUR_PI2 * m * m * s ** (-2 * d)) / (2 * math.pi * m * s) - d) / 2.0


def _hermite_lap(model: HeisenbergModel, m: np.ndarray, a: np.ndarray) -> np.ndarray:
    s, d = model.s, model.d
    return 2 * math.pi * m * s * (d + 2 * a) + _FOUR_PI2 * m * m * s ** (-2 * d)


# ---------------------------------------------------------------------------
# public counts
# ---------------------------------------------------------------------------

def count_negative_yamabe(model: HeisenbergModel) -> NegativeCount:
    """Exact number of negative Yamabe eigenvalues, with multiplicity.

    A Hermite family ``(n, a)`` is negative iff
    ``2 pi |n| s (d + 2a) + 4 n^2 s^{-2d} pi^2 < Y`` with
    ``Y = (2d-1)/16 s^{2d+2}``; a character iff its Laplacian eigenvalue is
    below ``Y``.  Hence ``|n| < Y / (2 pi s d)`` and the levels for fixed
    ``n`` form an initial segment.
    """
    s, d = model.s, model.d
    ceiling = -yamabe_shift(model)
    shells, char_total = _character_shells(model, -1.0, ceiling)
    m_max = int(math.floor(ceiling / (2 * math.pi * s * d))) + 1
    m = np.arange(1, m_max + 1, dtype=np.int64)
    a_real = _level_of(model, m.astype(float), np.full(m.shape, ceiling))
    hi = np.ceil(a_real).astype(np.int64) - 1
    # boundary correction by direct evaluation of the strict inequality
    hi = np.where(_hermite_lap(model, m, hi + 1) < ceiling, hi + 1, hi)
    hi = np.where((hi >= 0) & (_hermite_lap(model, m, hi) >= ceiling), hi - 1, hi)
    rows, herm_total = _hermite_rows(model, m, np.zeros_like(hi), hi)
    return NegativeCount("yamabe", model, herm_total + char_total, herm_total, char_total, rows, shells)


class UnsupportedDimension(ValueError):
    """Paneitz counting needs d >= 2."""


def count_negative_paneitz(model: HeisenbergModel) -> NegativeCount:
    """Exact number of negative Paneitz eigenvalues, with multiplicity.

    With ``S = s^{2d+2}`` the Paneitz eigenvalue of a character is
    ``F(x) = x^2 - c1 S x + c0 S^2`` at its Laplacian eigenvalue ``x``, and of
    a Hermite family ``F(x) - kappa n^2`` with
    ``kappa = 4 (d+1)/(2d-1) pi^2 s^2``.  Negativity means ``x`` lies strictly
    between the roots ``(c1 S -+ sqrt(delta_n)) / 2``.  Requires ``d >= 2``,
    where ``delta0 = c1^2 - 4 c0 > 0``.
    """
    d, s = model.d, model.s
    if d < 2:
        raise UnsupportedDimension("Paneitz counting requires d >= 2 (delta0 < 0 for d = 1)")
    pc = paneitz_constants(d)
    big = s ** (2 * d + 2)
    c1 = float(pc.c1) * big
    delta0 = float(pc.delta0) * big * big
    kappa_disc = 16.0 * (d + 1) / (2 * d - 1) * math.pi ** 2 * s * s
    root0 = math.sqrt(delta0)
    shells, char_total = _character_shells(model, 0.5 * (c1 - root0), 0.5 * (c1 + root0))
    # |n| bound: Hermite floor (quadratic in m) against the linear envelope of the upper root
    a2 = _FOUR_PI2 * s ** (-2 * d)
    a1 = 2 * math.pi * s * d - 0.5 * math.sqrt(kappa_disc)
    c = 0.5 * (c1 + root0)
    if c <= 0 and a1 >= 0:
        m_max = 0
    else:
        m_max = int(math.ceil((-a1 + math.sqrt(a1 * a1 + 4 * a2 * max(c, 0.0))) / (2 * a2))) + 1
    m = np.arange(1, m_max + 1, dtype=np.int64)
    mf = m.astype(float)
    disc = np.sqrt(delta0 + kappa_disc * mf * mf)
    lo_lap, hi_lap = 0.5 * (c1 - disc), 0.5 * (c1 + disc)
    lo = np.maximum(np.floor(_level_of(model, mf, lo_lap)).astype(np.int64) + 1, 0)
    hi = np.ceil(_level_of(model, mf, hi_lap)).astype(np.int64) - 1

    def negative(a):
        x = _hermite_lap(model, mf, a)
        return x * x - c1 * x + float(pc.c0) * big * big - 0.25 * kappa_disc * mf * mf < 0

    hi = np.where(negative(hi + 1), hi + 1, hi)
    hi = np.where((hi >= 0) & ~negative(hi), hi - 1, hi)
    lo = np.where((lo >= 1) & negative(lo - 1), lo - 1, lo)
    lo = np.where((lo <= hi) & ~negative(lo), lo + 1, lo)
    rows, herm_total = _hermite_rows(model, m, lo, hi)
    return NegativeCount("paneitz", model, herm_total + char_total, herm_total, char_total, rows, shells)


def count_negative(model: HeisenbergModel, operator: str) -> NegativeCount:
    if operator == "yamabe":
        return count_negative_yamabe(model)
    if operator == "paneitz":
        return count_negative_paneitz(model)
    raise ValueError(f"negative counts are defined for yamabe and paneitz, not {operator!r}")


def brute_force_count(model: HeisenbergModel, operator: str, n_max: int, level_max: int,
                      radius: int) -> int:
    """Direct label-by-label count over a box; used to cross-check small cases."""
    ev = yamabe_eigenvalue if operator == "yamabe" else paneitz_eigenvalue
    total = 0
    for n in range(-n_max, n_max + 1):
        if n == 0:
            continue
        for a in range(level_max + 1):
            fam = HermiteFamily(n, a)
            if ev(model, fam) < 0:
                total += fam.multiplicity(model)
    ranges = [range(-radius, radius + 1)] * model.d
    nu_ranges = [range(-radius * rj, radius * rj + 1) for rj in model.r]
    for xi in np.ndindex(*(len(r) for r in ranges)):
        x = tuple(int(v) - radius for v in xi)
        for nu in np.ndindex(*(len(r) for r in nu_ranges)):
            v = tuple(int(k) - rj * radius for k, rj in zip(nu, model.r))
            if ev(model, CharacterLabel(x, v)) < 0:
                total += 1
    return total


def fit_slope(s_values, counts) -> float:
    """Least-squares slope of ``log count`` against ``log s`` (zero counts skipped)."""
    s_values = np.asarray(s_values, dtype=float)
    counts = np.asarray([float(c) for c in counts])
    keep = counts > 0
    if keep.sum() < 2:
        raise ValueError("need at least two positive counts to fit a slope")
    return float(np.polyfit(np.log(s_values[keep]), np.log(counts[keep]), 1)[0])
