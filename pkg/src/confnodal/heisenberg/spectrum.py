"""Closed-form spectra of the Laplacian, Yamabe and Paneitz operators."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

import numpy as np

from ..lines import SpectralLine
from .model import CharacterLabel, HeisenbergModel, HermiteFamily, HermiteLabel

Label = Union[CharacterLabel, HermiteLabel, HermiteFamily]
OPERATORS = ("laplacian", "yamabe", "paneitz")


def _level(label) -> int:
    return label.level


def dual_lattice_points(model: HeisenbergModel, radius: float) -> list[CharacterLabel]:
    """Dual lattice points ``(xi, eta)`` with ``|xi|^2 + |eta|^2 <= radius^2``.

    The dual lattice is ``Z^d x prod_j (1/r_j) Z``.  Points are returned in
    lexicographic order of ``(xi, nu)``.
    """
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    d, r = model.d, model.r
    rad2 = Fraction(radius) ** 2 if isinstance(radius, (int, Fraction)) else radius * radius
    kx = int(math.floor(radius))
    xi_range = range(-kx, kx + 1)
    nu_ranges = [range(-int(math.floor(radius * rj)), int(math.floor(radius * rj)) + 1) for rj in r]
    out = []
    for xi in itertools.product(xi_range, repeat=d):
        xi2 = sum(v * v for v in xi)
        if xi2 > rad2:
            continue
        for nu in itertools.product(*nu_ranges):
            eta2 = sum(Fraction(v, rj) ** 2 for v, rj in zip(nu, r))
            if xi2 + eta2 <= rad2:
                out.append(CharacterLabel(tuple(xi), tuple(nu)))
    return out


def scalar_curvature(model: HeisenbergModel) -> float:
    """Scalar curvature ``-(d/2) s^{2d+2}`` of ``g_s``."""
    return -(model.d / 2.0) * model.s ** (2 * model.d + 2)


def yamabe_shift(model: HeisenbergModel) -> float:
    """Zeroth-order term ``(n-2)/(4(n-1)) R`` of the Yamabe operator, ``-(2d-1)/16 s^{2d+2}``."""
    n = model.dimension
    return (n - 2) / (4.0 * (n - 1)) * scalar_curvature(model)


def laplace_eigenvalue(model: HeisenbergModel, label: Label) -> float:
    """Laplacian eigenvalue of a character or Hermite family.

    Characters: ``4 pi^2 (|xi|^2 + s^2 |eta|^2)``.
    Hermite: ``2 pi |n| s (d + 2|alpha|) + 4 n^2 s^{-2d} pi^2``.
    """
    s, d = model.s, model.d
    if isinstance(label, CharacterLabel):
        xi2 = sum(v * v for v in label.xi)
        eta2 = sum(e * e for e in label.eta(model))
        return 4 * math.pi ** 2 * (xi2 + s * s * eta2)
    n = abs(label.n)
    return 2 * math.pi * n * s * (d + 2 * _level(label)) + 4 * n * n * s ** (-2 * d) * math.pi ** 2


def yamabe_eigenvalue(model: HeisenbergModel, label: Label) -> float:
    """Laplacian eigenvalue minus ``(2d-1)/16 s^{2d+2}``."""
    return laplace_eigenvalue(model, label) + yamabe_shift(model)


@dataclass(frozen=True)
class PaneitzConstants:
    """Coefficients of ``P_2 = Delta^2 - c1 s^{2d+2} Delta + c0 s^{4d+4} + ...``.

    ``delta0 = c1^2 - 4 c0``.  ``delta0_closed_form`` is the simplified
    expression ``(4d^2 - 7) / (4(2d - 1))`` found in the literature; it does
    not equal ``c1^2 - 4 c0`` and is reported only for comparison.
    """

    d: int
    c0: Fraction
    c1: Fraction

    @property
    def delta0(self) -> Fraction:
        return self.c1 * self.c1 - 4 * self.c0

    @property
    def delta0_closed_form(self) -> Fraction:
        d = self.d
        return Fraction(4 * d * d - 7, 4 * (2 * d - 1))

    def report(self) -> dict:
        return {
            "d": self.d,
            "c0": str(self.c0), "c1": str(self.c1), "delta0": str(self.delta0),
            "c0_float": float(self.c0), "c1_float": float(self.c1),
            "delta0_float": float(self.delta0),
            "delta0_closed_form": str(self.delta0_closed_form),
            "delta0_closed_form_float": float(self.delta0_closed_form),
            "closed_form_discrepancy": float(self.delta0_closed_form - self.delta0),
            "delta0_positive": self.delta0 > 0,
        }


def paneitz_constants(d: int) -> PaneitzConstants:
    """Exact rational ``c0(d)``, ``c1(d)``."""
    if d < 1:
        raise ValueError("d must be positive")
    q = 2 * d - 1
    c0 = Fraction((2 * d - 3) * ((2 * d + 1) * q * q - 4 * (16 * d * d + 18 * d + 1)), 256 * q * q)
    c1 = Fraction(q * q - 12, 8 * q)
    return PaneitzConstants(d, c0, c1)


def paneitz_torsion_term(model: HeisenbergModel, n: int) -> float:
    """The ``-4 (d+1)/(2d-1) n^2 pi^2 s^2`` term seen only by Hermite families."""
    d = model.d
    return -4.0 * (d + 1) / (2 * d - 1) * n * n * math.pi ** 2 * model.s ** 2


def paneitz_eigenvalue(model: HeisenbergModel, label: Label) -> float:
    """Paneitz eigenvalue from the quadratic in the Laplacian eigenvalue."""
    pc = paneitz_constants(model.d)
    big = model.s ** (2 * model.d + 2)
    x = laplace_eigenvalue(model, label)
    val = x * x - float(pc.c1) * big * x + float(pc.c0) * big * big
    if not isinstance(label, CharacterLabel):
        val += paneitz_torsion_term(model, label.n)
    return val


def paneitz_discriminant(model: HeisenbergModel, n: int = 0) -> float:
    """``delta_n = delta0 s^{4d+4} + 16 (d+1)/(2d-1) n^2 pi^2 s^2``."""
    d, s = model.d, model.s
    return float(paneitz_constants(d).delta0) * s ** (4 * d + 4) + 16.0 * (d + 1) / (2 * d - 1) * n * n * math.pi ** 2 * s * s


def paneitz_roots(model: HeisenbergModel, n: int = 0) -> tuple[float, float]:
    """Interval of Laplacian eigenvalues where the Paneitz eigenvalue is negative.

    Returns ``(lo, hi)``, empty (``lo >= hi``) if the discriminant is negative.
    """
    disc = paneitz_discriminant(model, n)
    c1 = float(paneitz_constants(model.d).c1) * model.s ** (2 * model.d + 2)
    if disc <= 0:
        return (0.0, 0.0)
    root = math.sqrt(disc)
    return (0.5 * (c1 - root), 0.5 * (c1 + root))


def eigenvalue(model: HeisenbergModel, label: Label, operator: str) -> float:
    if operator == "laplacian":
        return laplace_eigenvalue(model, label)
    if operator == "yamabe":
        return yamabe_eigenvalue(model, label)
    if operator == "paneitz":
        return paneitz_eigenvalue(model, label)
    raise ValueError(f"unknown operator {operator!r}")


def yamabe_null_parameter(d: int, n: int, level: int) -> float:
    """The unique ``s > 0`` at which the Hermite family ``(n, |alpha|)`` is null.

    ``s^{2d+1} = 8 pi |n| / (2d-1) * (2(d + 2|alpha|) + sqrt(4 (d + 2|alpha|)^2 + 2d - 1))``.
    """
    if n == 0:
        raise ValueError("n must be nonzero")
    m = d + 2 * level
    v = 8 * math.pi * abs(n) / (2 * d - 1) * (2 * m + math.sqrt(4 * m * m + 2 * d - 1))
    return v ** (1.0 / (2 * d + 1))


def _laplacian_window(model: HeisenbergModel, operator: str, cutoff: float, n: int = 0) -> float:
    """Largest Laplacian eigenvalue whose image under ``operator`` can be ``<= cutoff``.

    For the Paneitz operator this is the upper root of the quadratic (with the
    Hermite torsion term for ``n != 0``); ``-inf`` when no real root exists.
    """
    if operator == "laplacian":
        return cutoff
    if operator == "yamabe":
        return cutoff - yamabe_shift(model)
    d, s = model.d, model.s
    pc = paneitz_constants(d)
    big = s ** (2 * d + 2)
    c1, c0 = float(pc.c1) * big, float(pc.c0) * big * big
    torsion = paneitz_torsion_term(model, n) if n else 0.0
    disc = c1 * c1 - 4.0 * (c0 + torsion - cutoff)
    if disc < 0:
        return -math.inf
    return 0.5 * (c1 + math.sqrt(disc))


def spectrum_lines(model: HeisenbergModel, operator: str, max_eigenvalue: float) -> list[SpectralLine]:
    """All spectral lines with eigenvalue ``<= max_eigenvalue``, sorted.

    Characters are listed one line per lattice point.  Hermite families are
    aggregated by ``(n, |alpha|)`` and carry the full multiplicity
    ``|n|^d |Gamma_r| binom(|alpha| + d - 1, d - 1)``; ``n`` and ``-n`` are
    separate lines.
    """
    if operator not in OPERATORS:
        raise ValueError(f"unknown operator {operator!r}")
    d, s = model.d, model.s
    lines: list[SpectralLine] = []
    window = _laplacian_window(model, operator, max_eigenvalue)
    if window >= 0:
        for lab in _characters_in_ellipsoid(model, math.sqrt(window) / (2 * math.pi)):
            ev = eigenvalue(model, lab, operator)
            if ev <= max_eigenvalue:
                lines.append(SpectralLine(ev, 1, lab, operator))
    if operator == "paneitz":
        # the window grows at most linearly in n, the Hermite floor quadratically
        pc = paneitz_constants(d)
        big = s ** (2 * d + 2)
        c1, c0 = abs(float(pc.c1)) * big, abs(float(pc.c0)) * big * big
        kappa = 4.0 * (d + 1) / (2 * d - 1) * math.pi ** 2 * s * s
        const = 0.5 * (c1 + math.sqrt(c1 * c1 + 4 * c0 + 4 * abs(max_eigenvalue)))
        a2 = 4 * math.pi ** 2 * s ** (-2 * d)
        a1 = 2 * math.pi * s * d - math.sqrt(kappa)
        n_max = int(math.ceil((-a1 + math.sqrt(a1 * a1 + 4 * a2 * const)) / (2 * a2))) + 1
    else:
        n_max = None
    n = 1
    while n_max is None or n <= n_max:
        win = _laplacian_window(model, operator, max_eigenvalue, n)
        lap0 = laplace_eigenvalue(model, HermiteFamily(n, 0))
        if n_max is None and lap0 > win:
            break
        level = 0
        while laplace_eigenvalue(model, HermiteFamily(n, level)) <= win:
            ev = eigenvalue(model, HermiteFamily(n, level), operator)
            if ev <= max_eigenvalue:
                for sign in (1, -1):
                    f = HermiteFamily(sign * n, level)
                    lines.append(SpectralLine(ev, f.multiplicity(model), f, operator))
            level += 1
        n += 1
    lines.sort(key=lambda l: (l.eigenvalue, _sort_key(l.label)))
    return lines


def _sort_key(label):
    if isinstance(label, CharacterLabel):
        return (0, label.xi, label.nu)
    return (1, abs(label.n), -label.n, label.level)


def _characters_in_ellipsoid(model: HeisenbergModel, radius: float) -> Iterable[CharacterLabel]:
    """Characters with ``|xi|^2 + s^2 |eta|^2 <= radius^2``."""
    d, r, s = model.d, model.r, model.s
    kx = int(math.floor(radius))
    nu_ranges = [range(-int(math.floor(radius * rj / s)), int(math.floor(radius * rj / s)) + 1) for rj in r]
    for xi in itertools.product(range(-kx, kx + 1), repeat=d):
        xi2 = sum(v * v for v in xi)
        if xi2 > radius * radius:
            continue
        for nu in itertools.product(*nu_ranges):
            eta2 = sum((v / rj) ** 2 for v, rj in zip(nu, r))
            if xi2 + s * s * eta2 <= radius * radius * (1 + 1e-12):
                yield CharacterLabel(tuple(xi), tuple(nu))


def spectrum_record(model: HeisenbergModel, operator: str, lines: list[SpectralLine]) -> dict:
    """JSON-ready record ``{operator, d, r, s, lines}``."""
    return {
        "operator": operator, "d": model.d, "r": list(model.r), "s": model.s,
        "lines": [l.to_dict() for l in lines],
    }


def lowest_nonzero(lines: list[SpectralLine], count: int, zero: float = 1e-12) -> np.ndarray:
    """First ``count`` nonzero eigenvalues repeated by multiplicity."""
    vals: list[float] = []
    for l in sorted(lines, key=lambda l: l.eigenvalue):
        if abs(l.eigenvalue) > zero:
            vals.extend([l.eigenvalue] * l.multiplicity)
        if len(vals) >= count:
            break
    return np.array(vals[:count])
