"""Jacobi theta function and Hermite functions."""

from __future__ import annotations

import math

import numpy as np

THETA_TAIL = 1e-14
PRODUCT_TAIL = 1e-16
HERMITE_MAX_ORDER = 200


class DomainError(ValueError):
    """Argument outside the domain where the series or product converges."""


def theta_truncation(imag_z: float, imag_tau: float, tail: float = THETA_TAIL) -> int:
    """Smallest K with the geometric tail bound of the theta series below ``tail``.

    The bound is ``exp(-pi b K^2) exp(2 pi |y| K) / (1 - exp(-pi b (2K + 1)))``
    with ``b = Im tau`` and ``y = Im z``; it dominates the sum over ``|k| > K``
    once ``K`` is past the peak ``|y| / b`` of the Gaussian envelope.
    """
    if imag_tau <= 0:
        raise DomainError("Im(tau) must be positive")
    b, y = imag_tau, abs(imag_z)
    k = max(1, int(math.ceil(y / b)) + 1)
    while True:
        expo = -math.pi * b * k * k + 2 * math.pi * y * k
        denom = 1.0 - math.exp(-math.pi * b * (2 * k + 1))
        if expo < 0 and math.exp(expo) / denom < tail:
            return k
        k += 1


def jacobi_theta(z, tau):
    """Jacobi theta function ``sum_k exp(i pi k^2 tau + 2 i pi k z)``.

    Parameters
    ----------
    z : complex or array_like
        Argument; arrays are evaluated elementwise.
    tau : complex
        Nome parameter with ``Im(tau) > 0``.

    Returns
    -------
    complex or ndarray
        Symmetric partial sum over ``|k| <= K``, ``K`` from
        :func:`theta_truncation` for the largest ``|Im z|`` in the input.
    """
    tau = complex(tau)
    if tau.imag <= 0:
        raise DomainError("Im(tau) must be positive")
    zz = np.asarray(z, dtype=complex)
    kmax = theta_truncation(float(np.max(np.abs(zz.imag))) if zz.size else 0.0, tau.imag)
    k = np.arange(-kmax, kmax + 1)
    # sum from the outside in so small terms are added first
    order = np.argsort(-np.abs(k), kind="stable")
    k = k[order]
    phase = np.exp(1j * np.pi * tau * k ** 2)
    terms = phase * np.exp(2j * np.pi * np.multiply.outer(zz, k))
    out = terms.sum(axis=-1)
    return complex(out) if np.ndim(z) == 0 else out


def product_truncation(s: float, tail: float = PRODUCT_TAIL) -> int:
    """Smallest M with ``exp(-2 pi s M) < tail``."""
    if s <= 0:
        raise DomainError("s must be positive")
    return max(1, int(math.floor(-math.log(tail) / (2 * math.pi * s))) + 1)


def jacobi_theta_triple_product(z, s: float):
    """Theta at ``tau = i s`` from Jacobi's triple product.

    ``prod_m (1 - q^{2m})(1 + e^{2 i pi z} q^{2m-1})(1 + e^{-2 i pi z} q^{2m-1})``
    with ``q = exp(-pi s)``, truncated at ``M`` factors from
    :func:`product_truncation`.  Vanishes exactly at the zero lattice.
    """
    if s <= 0:
        raise DomainError("s must be positive")
    zz = np.asarray(z, dtype=complex)
    m = np.arange(1, product_truncation(s) + 1)
    q2m = np.exp(-2 * np.pi * s * m)
    q2m1 = np.exp(-np.pi * s * (2 * m - 1))
    ep = np.exp(2j * np.pi * zz)[..., None]
    em = np.exp(-2j * np.pi * zz)[..., None]
    out = np.prod((1 - q2m) * (1 + ep * q2m1) * (1 + em * q2m1), axis=-1)
    return complex(out) if np.ndim(z) == 0 else out


def hermite_h(k: int, v):
    """Hermite function ``(-1)^k d^k/dv^k exp(-v^2/2)``.

    Equals ``He_k(v) exp(-v^2/2)`` with the probabilists' polynomial, computed
    by the three-term recurrence ``p_{j+1} = v p_j - j p_{j-1}``.  The running
    values are rescaled whenever they grow past ``1e150`` and the scale is
    carried as a logarithm, so orders up to a few hundred stay finite until the
    Gaussian is applied.  A result that does not fit in a double raises
    :class:`OverflowError` instead of returning ``inf``.
    """
    if k < 0 or int(k) != k:
        raise ValueError("order must be a nonnegative integer")
    k = int(k)
    vv = np.asarray(v, dtype=float)
    p_prev = np.zeros_like(vv)
    p = np.ones_like(vv)
    logscale = np.zeros_like(vv)
    for j in range(k):
        p_next = vv * p - j * p_prev
        p_prev, p = p, p_next
        big = np.abs(p) > 1e150
        if np.any(big):
            f = np.where(big, 1e-150, 1.0)
            p = p * f
            p_prev = p_prev * f
            logscale = logscale - np.log(f)
    with np.errstate(divide="ignore"):
        logmag = np.log(np.abs(p)) + logscale - vv * vv / 2
    if np.any(logmag > 709.0):
        raise OverflowError(f"hermite_h({k}, v) exceeds double range")
    out = np.sign(p) * np.exp(logmag)
    out = np.where(p == 0, 0.0, out)
    return float(out) if np.ndim(v) == 0 else out
