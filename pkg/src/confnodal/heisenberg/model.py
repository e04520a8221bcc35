"""Heisenberg nilmanifold models and eigenfunction labels."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence


class LatticeError(ValueError):
    """Lattice sequence violates the divisibility chain."""


@dataclass(frozen=True)
class HeisenbergModel:
    """Quotient of the (2d+1)-dimensional Heisenberg group with metric ``g_s``.

    The lattice is determined by ``r = (r_1, ..., r_d)`` with ``r_j | r_{j+1}``.
    Points are written ``(x, y, t)`` with ``x, y`` in ``R^d``; the fundamental
    domain is ``[0,1)^d x prod_j [0, r_j) x [0,1)`` and the orthonormal frame of
    ``g_s`` is ``X_j = d/dx_j``, ``s Y_j = s (d/dy_j + x_j d/dt)``,
    ``s^{-d} T = s^{-d} d/dt``.
    """

    d: int
    r: tuple[int, ...]
    s: float

    def __post_init__(self):
        r = tuple(int(v) for v in (self.r if isinstance(self.r, Sequence) else (self.r,)))
        object.__setattr__(self, "r", r)
        if int(self.d) != self.d or self.d < 1:
            raise ValueError("d must be a positive integer")
        if len(r) != self.d:
            raise LatticeError(f"expected {self.d} lattice entries, got {len(r)}")
        if any(v < 1 for v in r):
            raise LatticeError("lattice entries must be positive integers")
        for j in range(self.d - 1):
            if r[j + 1] % r[j]:
                raise LatticeError(f"r_{j + 1} = {r[j]} does not divide r_{j + 2} = {r[j + 1]}")
        if not self.s > 0:
            raise ValueError("s must be positive")

    @property
    def dimension(self) -> int:
        return 2 * self.d + 1

    @property
    def volume(self) -> int:
        """``|Gamma_r| = r_1 ... r_d``; independent of ``s``."""
        return math.prod(self.r)

    def with_s(self, s: float) -> "HeisenbergModel":
        return HeisenbergModel(self.d, self.r, s)


@dataclass(frozen=True)
class CharacterLabel:
    """Character ``exp(2 i pi (xi.x + eta.y))`` with ``eta_j = nu_j / r_j``."""

    xi: tuple[int, ...]
    nu: tuple[int, ...]

    def eta(self, model: HeisenbergModel) -> tuple[float, ...]:
        return tuple(v / rj for v, rj in zip(self.nu, model.r))

    def eta_exact(self, model: HeisenbergModel) -> tuple[Fraction, ...]:
        return tuple(Fraction(v, rj) for v, rj in zip(self.nu, model.r))

    def to_dict(self) -> dict:
        return {"family": "character", "xi": list(self.xi), "nu": list(self.nu)}


@dataclass(frozen=True)
class HermiteLabel:
    """Hermite eigenfunction ``W_n^{a,b} f_alpha``.

    ``a_num`` and ``b_num`` hold numerators: ``a_j = a_num[j] / |n|`` and
    ``b_j = b_num[j] / r_j``.  For spectral lines only ``n`` and ``|alpha|``
    matter; see :class:`HermiteFamily`.
    """

    n: int
    alpha: tuple[int, ...]
    a_num: tuple[int, ...] = ()
    b_num: tuple[int, ...] = ()

    def __post_init__(self):
        if self.n == 0:
            raise ValueError("Hermite labels need n != 0")
        if any(k < 0 for k in self.alpha):
            raise ValueError("alpha must be a multi-index")
        d = len(self.alpha)
        if not self.a_num:
            object.__setattr__(self, "a_num", (0,) * d)
        if not self.b_num:
            object.__setattr__(self, "b_num", (0,) * d)
        if any(not 0 <= v < abs(self.n) for v in self.a_num):
            raise ValueError("a_j must lie in {0, 1/|n|, ..., (|n|-1)/|n|}")

    @property
    def level(self) -> int:
        return sum(self.alpha)

    def a(self) -> tuple[float, ...]:
        return tuple(v / abs(self.n) for v in self.a_num)

    def b(self, model: HeisenbergModel) -> tuple[float, ...]:
        if any(not 0 <= v < rj for v, rj in zip(self.b_num, model.r)):
            raise ValueError("b_j must lie in {0, 1/r_j, ..., (r_j-1)/r_j}")
        return tuple(v / rj for v, rj in zip(self.b_num, model.r))

    def to_dict(self) -> dict:
        return {"family": "hermite", "n": self.n, "alpha": list(self.alpha),
                "a_num": list(self.a_num), "b_num": list(self.b_num)}


@dataclass(frozen=True)
class HermiteFamily:
    """All ``W_n^{a,b} f_alpha`` with fixed ``n`` and ``|alpha| = level``."""

    n: int
    level: int

    def __post_init__(self):
        if self.n == 0 or self.level < 0:
            raise ValueError("need n != 0 and level >= 0")

    def multiplicity(self, model: HeisenbergModel) -> int:
        return abs(self.n) ** model.d * model.volume * math.comb(self.level + model.d - 1, model.d - 1)

    def to_dict(self) -> dict:
        return {"family": "hermite", "n": self.n, "level": self.level}
