"""Pointwise evaluation of Heisenberg eigenfunctions and their nodal sets."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from ..special import hermite_h, jacobi_theta
from .model import CharacterLabel, HeisenbergModel, HermiteLabel
from .spectrum import dual_lattice_points, laplace_eigenvalue, yamabe_eigenvalue, yamabe_null_parameter

GAUSSIAN_CUTOFF = 1e-14


class NotAtNullParameter(ValueError):
    """Model parameter s does not put the ground Hermite family in the kernel."""


def _split(model: HeisenbergModel, points) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    p = np.atleast_2d(np.asarray(points, dtype=float))
    d = model.d
    if p.shape[-1] != 2 * d + 1:
        raise ValueError(f"points need {2 * d + 1} coordinates (x, y, t)")
    return p[:, :d], p[:, d:2 * d], p[:, 2 * d]


def hermite_sum_cutoff(n: int, s: float, level: int) -> int:
    """Number of lattice shifts ``|k| <= K`` kept in the Hermite k-sum.

    Beyond ``K`` the argument ``v = sqrt(2 pi |n| s) (x + k + c)`` is past the
    classical turning point ``sqrt(2 level + 1)`` by enough that the Gaussian
    envelope ``exp(-pi |n| s u^2 / 2)`` is below ``1e-14``.
    """
    scale = math.sqrt(2 * math.pi * abs(n) * s)
    u_gauss = math.sqrt(-2.0 * math.log(GAUSSIAN_CUTOFF) / (math.pi * abs(n) * s))
    u_turn = math.sqrt(2 * level + 1) / scale
    return int(math.ceil(u_gauss + u_turn)) + 2


def _hermite_value_ksum(model: HeisenbergModel, label: HermiteLabel, x, y, t):
    n, s = label.n, model.s
    a = np.array(label.a())
    b = np.array(label.b(model))
    scale = math.sqrt(2 * math.pi * abs(n) * s)
    out = np.exp(2j * math.pi * n * t)
    for j in range(model.d):
        kmax = hermite_sum_cutoff(n, s, label.alpha[j])
        k = np.arange(-kmax, kmax + 1)
        u = x[:, j, None] + k[None, :] + a[j] + b[j]
        terms = hermite_h(label.alpha[j], scale * u) * np.exp(2j * math.pi * n * (k[None, :] + a[j] + b[j]) * y[:, j, None])
        out = out * terms.sum(axis=1)
    return out


def _hermite_value_theta(model: HeisenbergModel, label: HermiteLabel, x, y, t):
    """Ground family through theta.

    ``sum_k exp(-pi |n| s (u + k)^2) exp(2 i pi n (k + c) v)`` equals
    ``exp(-pi |n| s u^2) exp(2 i pi n c v) theta(n v + i |n| s u, i |n| s)``.
    """
    n, s = label.n, model.s
    m = abs(n)
    a = np.array(label.a())
    b = np.array(label.b(model))
    out = np.exp(2j * math.pi * n * t)
    for j in range(model.d):
        c = a[j] + b[j]
        u = x[:, j] + c
        z = n * y[:, j] + 1j * m * s * u
        out = out * np.exp(-math.pi * m * s * u * u) * np.exp(2j * math.pi * n * c * y[:, j]) * jacobi_theta(z, 1j * m * s)
    return out


def eigenfunction_value(model: HeisenbergModel, label: Union[CharacterLabel, HermiteLabel],
                        points, method: str = "auto"):
    """Evaluate a character or Hermite eigenfunction at points ``(x, y, t)``.

    Parameters
    ----------
    points : array_like, shape (..., 2d+1)
        Coordinates ordered ``x_1..x_d, y_1..y_d, t``.
    method : {"auto", "theta", "ksum"}
        For Hermite labels: ``"auto"`` uses the theta form when
        ``alpha = 0`` and the truncated lattice sum otherwise.
    """
    scalar = np.ndim(points) == 1
    x, y, t = _split(model, points)
    if isinstance(label, CharacterLabel):
        eta = np.array(label.eta(model))
        xi = np.array(label.xi, dtype=float)
        out = np.exp(2j * math.pi * (x @ xi + y @ eta))
    else:
        if method == "auto":
            method = "theta" if label.level == 0 else "ksum"
        if method == "theta":
            if label.level != 0:
                raise ValueError("theta form only applies to alpha = 0")
            out = _hermite_value_theta(model, label, x, y, t)
        elif method == "ksum":
            out = _hermite_value_ksum(model, label, x, y, t)
        else:
            raise ValueError(f"unknown method {method!r}")
    return complex(out[0]) if scalar else out


@dataclass(frozen=True)
class NodalPiece:
    """Codimension-two sheet ``{x_j = x_value, y_j = y}`` for each listed ``y``."""

    axis: int
    x_value: float
    y_values: tuple[float, ...]

    def to_dict(self) -> dict:
        return {"axis": self.axis, "x": self.x_value, "y": list(self.y_values)}


def nodal_set_hermite_ground(model: HeisenbergModel, b_num=None, sign: int = 1,
                             rtol: float = 1e-8) -> list[NodalPiece]:
    """Closed-form nodal set of ``W_{+-1}^{0,b} f_0`` at the null parameter.

    The theta factor for axis ``j`` vanishes iff ``x_j + b_j`` and ``y_j`` are
    half-integers, giving ``x_j = (1/2 - b_j) mod 1`` and
    ``y_j in {1/2, 3/2, ..., r_j - 1/2}``.  The set is the union over ``j``.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    s0 = yamabe_null_parameter(model.d, 1, 0)
    if abs(model.s - s0) > rtol * s0:
        raise NotAtNullParameter(f"s = {model.s!r} but the ground null parameter is {s0!r}")
    b_num = tuple(b_num) if b_num is not None else (0,) * model.d
    pieces = []
    for j, (bj, rj) in enumerate(zip(b_num, model.r)):
        if not 0 <= bj < rj:
            raise ValueError("b_j must lie in {0, 1/r_j, ..., (r_j-1)/r_j}")
        xv = (0.5 - bj / rj) % 1.0
        pieces.append(NodalPiece(j, xv, tuple(l - 0.5 for l in range(1, rj + 1))))
    return pieces


def distance_to_nodal_set(model: HeisenbergModel, pieces: list[NodalPiece], points) -> np.ndarray:
    """Coordinate distance from points to the union of nodal sheets (periodic in x and y)."""
    x, y, _ = _split(model, points)
    best = np.full(x.shape[0], np.inf)
    for piece in pieces:
        j = piece.axis
        dx = np.abs(x[:, j] - piece.x_value) % 1.0
        dx = np.minimum(dx, 1.0 - dx)
        rj = model.r[j]
        dy = np.full(x.shape[0], np.inf)
        for yv in piece.y_values:
            e = np.abs(y[:, j] - yv) % rj
            dy = np.minimum(dy, np.minimum(e, rj - e))
        best = np.minimum(best, np.hypot(dx, dy))
    return best


def sample_nodal_points(model: HeisenbergModel, pieces: list[NodalPiece], count: int,
                        seed: int = 0) -> np.ndarray:
    """Random points on the nodal set, cycling through the pieces."""
    rng = np.random.default_rng(seed)
    d = model.d
    pts = np.empty((count, 2 * d + 1))
    pts[:, :d] = rng.random((count, d))
    pts[:, d:2 * d] = rng.random((count, d)) * np.array(model.r)
    pts[:, 2 * d] = rng.random(count)
    for i in range(count):
        piece = pieces[i % len(pieces)]
        pts[i, piece.axis] = piece.x_value
        pts[i, d + piece.axis] = piece.y_values[rng.integers(len(piece.y_values))]
    return pts


def sample_far_points(model: HeisenbergModel, pieces: list[NodalPiece], count: int,
                      min_distance: float = 0.1, seed: int = 0) -> np.ndarray:
    """Random points of the fundamental domain at distance ``>= min_distance`` from the nodal set."""
    rng = np.random.default_rng(seed)
    d = model.d
    out = []
    while len(out) < count:
        p = np.concatenate([rng.random(d), rng.random(d) * np.array(model.r), rng.random(1)])
        if distance_to_nodal_set(model, pieces, p)[0] >= min_distance:
            out.append(p)
    return np.array(out)


@dataclass
class CharacterNullReport:
    """Kernel data for a character ``(xi, eta)`` on the ``d = 1``, ``r = 1`` model."""

    xi: int
    eta: int
    s: float | None
    residual: float | None
    kernel_dimension: int
    kernel_labels: list = field(default_factory=list)
    nodal_sets: dict = field(default_factory=dict)
    message: str = ""

    def to_dict(self) -> dict:
        return {"xi": self.xi, "eta": self.eta, "s": self.s, "residual": self.residual,
                "kernel_dimension": self.kernel_dimension,
                "kernel_labels": [l.to_dict() for l in self.kernel_labels],
                "nodal_sets": self.nodal_sets, "message": self.message}


def character_null_parameter(xi: int, eta: int) -> float | None:
    """Positive root ``s`` of ``4 pi^2 (xi^2 + s^2 eta^2) = s^4 / 16``.

    ``s^2 = 32 pi^2 eta^2 + sqrt((32 pi^2 eta^2)^2 + 64 pi^2 xi^2)``.
    ``None`` for ``(0, 0)``, whose eigenvalue is ``-s^4/16 < 0`` for all ``s``.
    """
    if xi == 0 and eta == 0:
        return None
    p = 32 * math.pi ** 2 * eta * eta
    s2 = p + math.sqrt(p * p + 64 * math.pi ** 2 * xi * xi)
    return math.sqrt(s2)


def character_null_analysis(model: HeisenbergModel, xi: int, eta: int) -> CharacterNullReport:
    """Null parameter, kernel dimension and nodal sets for a character.

    Works on ``d = 1``, ``r = (1)``.  The kernel at the returned ``s`` is
    found by scanning the dual lattice for eigenvalues within the zero
    tolerance, which stands in for the exact algebraic argument.

    Nodal sets of the real and imaginary parts of
    ``exp(2 i pi (xi x + eta y))`` are the lines ``2(xi x + eta y) in 1/2 + Z``
    and ``2(xi x + eta y) in Z`` in the ``(x, y)`` torus, times the ``t``
    circle.  For ``xi = 0`` these are the planes ``y in {k/(2|eta|)}`` (up to a
    shift of ``1/(4|eta|)``); for ``eta = 0`` the planes ``x in {k/(2|xi|)}``.
    """
    if model.d != 1 or model.r != (1,):
        raise ValueError("character null analysis is implemented for d = 1, r = (1)")
    s = character_null_parameter(xi, eta)
    if s is None:
        return CharacterNullReport(xi, eta, None, None, 0,
                                   message="(0, 0) has eigenvalue -s^4/16 < 0 for every s > 0; no null parameter")
    at = model.with_s(s)
    label = CharacterLabel((xi,), (eta,))
    scale = s ** 4 / 16
    residual = abs(yamabe_eigenvalue(at, label)) / scale
    radius = math.sqrt(xi * xi + eta * eta) + 2
    tol = 1e-10 * scale
    kernel = [lab for lab in dual_lattice_points(at, radius) if abs(yamabe_eigenvalue(at, lab)) <= tol]
    nodal = {
        "real_part": f"2*({xi}*x + {eta}*y) in 1/2 + Z, all t",
        "imaginary_part": f"2*({xi}*x + {eta}*y) in Z, all t",
    }
    if xi == 0:
        nodal["planes"] = {"axis": "y", "values": [k / (2 * abs(eta)) for k in range(2 * abs(eta) + 1)],
                           "note": "imaginary part; the real part is shifted by 1/(4|eta|)"}
    elif eta == 0:
        nodal["planes"] = {"axis": "x", "values": [k / (2 * abs(xi)) for k in range(2 * abs(xi) + 1)],
                           "note": "imaginary part; the real part is shifted by 1/(4|xi|)"}
    else:
        nodal["product_form"] = ("sin 2pi(|xi| x + th1) * sin 2pi(|eta| y + th2) vanishes on "
                                 "x in {k/(2|xi|)} - th1/|xi| union y in {k/(2|eta|)} - th2/|eta|")
    return CharacterNullReport(xi, eta, s, residual, len(kernel), kernel, nodal)


def no_character_in_kernel(model: HeisenbergModel, tol: float | None = None) -> bool:
    """True if no character eigenvalue of the Yamabe operator is within ``tol`` of zero."""
    shift = (2 * model.d - 1) / 16 * model.s ** (2 * model.d + 2)
    tol = 1e-8 * (1 + shift) if tol is None else tol
    radius = (math.sqrt(shift + tol) / (2 * math.pi) + 1) / min(1.0, model.s)
    return all(abs(yamabe_eigenvalue(model, lab)) > tol for lab in dual_lattice_points(model, radius)
               if laplace_eigenvalue(model, lab) <= shift + 2 * tol)
