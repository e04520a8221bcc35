"""GJMS spectra on Einstein manifolds and hyperbolic-surface products.

On an Einstein manifold with ``Ric = lambda (n-1) g`` the GJMS operator of
order ``k`` factors as

    P_k = prod_{j=1..k} (Delta + (lambda/4)(n + 2j - 2)(n - 2j)),

so each Laplacian eigenvalue maps to a product.  On ``N^{n-2} x Sigma`` with
``N`` hyperbolic and ``Sigma`` a hyperbolic surface (``Ric = -g``) a surface
eigenvalue ``lam`` gives the eigenvalue ``Lambda_k = prod_j (lam - mu_j)`` with
``mu_j = (n + 2j - 2)(n - 2j) / (4(n-1))``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np

from .lines import SpectralLine


class OrderOutOfRange(ValueError):
    """GJMS order not available in this dimension."""


@dataclass(frozen=True)
class EinsteinModel:
    """Einstein manifold data: ``Ric = einstein_constant * (n-1) * g``.

    ``base_spectrum`` holds ``(eigenvalue, multiplicity)`` pairs of the
    Laplacian.  ``extended`` admits orders ``k > n/2`` in even dimension,
    where the Laplacian-power family continues on Einstein manifolds.
    """

    n: int
    einstein_constant: float
    base_spectrum: tuple[tuple[float, int], ...]
    extended: bool = False

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("dimension must be at least 3")
        spec = tuple((float(mu), int(m)) for mu, m in self.base_spectrum)
        object.__setattr__(self, "base_spectrum", spec)
        vals = [mu for mu, _ in spec]
        if any(v < 0 for v in vals):
            raise ValueError("Laplacian eigenvalues must be nonnegative")
        if any(b < a for a, b in zip(vals, vals[1:])):
            raise ValueError("base spectrum must be nondecreasing")
        if any(m < 1 for _, m in spec):
            raise ValueError("multiplicities must be positive")

    @property
    def scalar_curvature(self) -> float:
        return self.einstein_constant * self.n * (self.n - 1)


def gjms_factor_shifts(n: int, einstein_constant: float, k: int) -> np.ndarray:
    """Zeroth-order terms ``(lambda/4)(n + 2j - 2)(n - 2j)``, ``j = 1..k``."""
    j = np.arange(1, k + 1)
    return einstein_constant / 4.0 * (n + 2 * j - 2) * (n - 2 * j)


def check_order(n: int, k: int, extended: bool = False) -> None:
    if k < 1:
        raise OrderOutOfRange("order k must be at least 1")
    if n % 2 == 0 and k > n // 2 and not extended:
        raise OrderOutOfRange(
            f"k = {k} > n/2 = {n // 2}: in even dimension there do not exist conformally "
            "invariant operators with principal part Delta^k for k > n/2; "
            "flag the model as Einstein-extended to use the Laplacian-power family")


def gjms_spectrum(model: EinsteinModel, k: int) -> list[SpectralLine]:
    """Spectrum of ``P_k`` from the base Laplacian spectrum, sorted ascending."""
    check_order(model.n, k, model.extended)
    shifts = gjms_factor_shifts(model.n, model.einstein_constant, k)
    lines = []
    for mu, mult in model.base_spectrum:
        lines.append(SpectralLine(float(np.prod(mu + shifts)), mult, {"laplacian": mu}, f"gjms{k}"))
    lines.sort(key=lambda l: l.eigenvalue)
    return lines


def mu_j(j, n: int):
    """``mu_j = (n + 2j - 2)(n - 2j) / (4(n-1))``; exact for integer or Fraction ``j``."""
    if n < 2:
        raise ValueError("n must be at least 2")
    if isinstance(j, (int, Fraction)):
        return Fraction((n + 2 * j - 2) * (n - 2 * j)) / (4 * (n - 1))
    return (n + 2 * j - 2) * (n - 2 * j) / (4.0 * (n - 1))


def mu_threshold(n: int) -> Fraction:
    """``mu_{(n-1)/2} = (2n - 3) / (4(n-1))``."""
    return mu_j(Fraction(n - 1, 2), n)


def hyperbolic_product_eigenvalue(lam, k: int, n: int):
    """``Lambda_k(lam) = prod_{j=1..k} (lam - mu_j)``; vectorized in ``lam``."""
    if np.any(np.asarray(lam) < 0):
        raise ValueError("surface eigenvalues are nonnegative")
    mus = np.array([float(mu_j(j, n)) for j in range(1, k + 1)])
    lam = np.asarray(lam, dtype=float)
    return np.prod(lam[..., None] - mus, axis=-1) if k else np.ones_like(lam)


def hyperbolic_product_polynomial(k: int, n: int) -> np.ndarray:
    """Coefficients (highest degree first) of ``prod_j (x - mu_j)``."""
    return np.poly([float(mu_j(j, n)) for j in range(1, k + 1)])


def horner(coeffs: Sequence[float], x):
    out = np.zeros_like(np.asarray(x, dtype=float))
    for c in coeffs:
        out = out * x + c
    return out


def stated_hypothesis(n: int, k: int) -> str | None:
    """Which clause of the hyperbolic-product sign statement covers ``(n, k)``.

    ``"odd"``: ``k`` odd and ``k <= (n-1)/2``.  ``"extended"``: ``n`` of the
    form ``4l`` or ``4l+1`` and ``k >= n/2``.  ``None`` otherwise.
    """
    if k % 2 == 1 and 2 * k <= n - 1:
        return "odd"
    if n % 4 in (0, 1) and 2 * k >= n:
        return "extended"
    return None


def sign_guaranteed(n: int, k: int) -> bool:
    """True when ``Lambda_k < 0`` for every ``lam`` in ``(0, mu_{(n-1)/2})``.

    For such ``lam`` the factor ``lam - mu_j`` is negative exactly when
    ``mu_j > mu_{(n-1)/2}``, i.e. ``j < (n-1)/2``, or ``j = (n-1)/2``; the
    factors with ``2j >= n`` are positive since ``mu_j <= 0 < lam`` there.  The
    sign is therefore ``(-1)^q`` with ``q`` the number of ``j <= k`` with
    ``2j <= n - 1``.  This is negative for odd ``k <= (n-1)/2`` and, for
    ``k >= n/2``, iff ``floor((n-1)/2)`` is odd, i.e. ``n`` is ``0`` or ``3``
    mod 4.
    """
    q = min(k, (n - 1) // 2)
    return q % 2 == 1


@dataclass
class NegativeProductCount:
    count: int
    total: int
    stated_hypothesis: str | None
    sign_guaranteed: bool
    flag: str
    values: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"count": self.count, "total": self.total, "stated_hypothesis": self.stated_hypothesis,
                "sign_guaranteed": self.sign_guaranteed, "flag": self.flag,
                "values": [float(v) for v in self.values]}


@dataclass(frozen=True)
class HyperbolicProductModel:
    """``N^{n-2} x Sigma`` with ``Ric = -g``; ``surface_spectrum`` lists Laplacian eigenvalues of ``Sigma``."""

    n: int
    surface_spectrum: tuple[float, ...]
    k: int

    def __post_init__(self):
        if self.n < 4:
            raise ValueError("product models need n >= 4")
        spec = tuple(float(v) for v in self.surface_spectrum)
        if any(v < 0 for v in spec):
            raise ValueError("surface eigenvalues must be nonnegative")
        object.__setattr__(self, "surface_spectrum", spec)
        if self.k < 1:
            raise ValueError("k must be positive")

    def as_einstein(self, extended: bool = True) -> EinsteinModel:
        spec = sorted(self.surface_spectrum)
        return EinsteinModel(self.n, -1.0 / (self.n - 1), tuple((v, 1) for v in spec), extended)


def count_negative_gjms_product(model: HyperbolicProductModel) -> NegativeProductCount:
    """Number of supplied surface eigenvalues with ``Lambda_k < 0``.

    Every eigenvalue is evaluated; the flag records whether the sign is
    guaranteed for eigenvalues in ``(0, mu_{(n-1)/2})`` (see
    :func:`sign_guaranteed`).
    """
    lam = np.array(model.surface_spectrum)
    vals = hyperbolic_product_eigenvalue(lam, model.k, model.n) if lam.size else np.zeros(0)
    guaranteed = sign_guaranteed(model.n, model.k)
    flag = "sign guaranteed on (0, mu_threshold)" if guaranteed else "no sign guarantee"
    return NegativeProductCount(int(np.sum(vals < 0)), int(lam.size), stated_hypothesis(model.n, model.k),
                                guaranteed, flag, vals.tolist())


def sign_table(n: int, ks: Iterable[int], samples: int = 100) -> dict:
    """Sign of ``Lambda_k`` on ``samples`` interior points of ``(0, mu_{(n-1)/2})``."""
    top = float(mu_threshold(n))
    lam = np.linspace(0, top, samples + 2)[1:-1]
    table = {}
    for k in ks:
        vals = hyperbolic_product_eigenvalue(lam, k, n)
        table[k] = {"negative": int(np.sum(vals < 0)), "samples": samples,
                    "stated_hypothesis": stated_hypothesis(n, k),
                    "sign_guaranteed": sign_guaranteed(n, k),
                    "max_value": float(vals.max()), "min_value": float(vals.min())}
    return table


def yamabe_product_bound(t: float, mu_sup: float, lam: float, n: int) -> float:
    """Rayleigh-quotient bound ``t (lam - (n-2)/(2(n-1)) + mu_sup / t)`` for ``P_1`` on the product."""
    if t <= 0:
        raise ValueError("t must be positive")
    if n < 4:
        raise ValueError("n must be at least 4")
    return t * (lam - (n - 2) / (2.0 * (n - 1)) + mu_sup / t)


def synthetic_surface_spectrum(count: int, lo: float, hi: float, seed: int = 0) -> list[float]:
    """``count`` sorted eigenvalues drawn uniformly from the open interval ``(lo, hi)``."""
    if not hi > lo >= 0:
        raise ValueError("need 0 <= lo < hi")
    rng = np.random.default_rng(seed)
    vals = lo + (hi - lo) * rng.uniform(0.0, 1.0, count)
    vals = np.where(vals <= lo, np.nextafter(lo, hi), vals)
    return sorted(vals.tolist())


def parse_surface_spectrum(text: str) -> list[float]:
    """Parse a JSON array or a plain list with one eigenvalue per line."""
    stripped = text.strip()
    if not stripped:
        return []
    if stripped.startswith("["):
        vals = json.loads(stripped)
    else:
        vals = [float(line.split("#", 1)[0]) for line in stripped.splitlines()
                if line.split("#", 1)[0].strip()]
    vals = [float(v) for v in vals]
    if any(v < 0 or not math.isfinite(v) for v in vals):
        raise ValueError("surface eigenvalues must be finite and nonnegative")
    return vals


def load_surface_spectrum(source: Union[str, Path]) -> list[float]:
    """Read a surface spectrum from a file path or an inline JSON array."""
    if isinstance(source, str) and source.lstrip().startswith("["):
        return parse_surface_spectrum(source)
    return parse_surface_spectrum(Path(source).read_text())
