"""Scalar special functions and root finders shared by both optimizers."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConvergenceError

_INV_E = math.exp(-1.0)
_SERIES_CUTOFF = 1e-4


@dataclass(frozen=True)
class RootBracket:
    lo: float
    hi: float
    tol: float = 1e-10
    max_iter: int = 200

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"bracket requires lo < hi, got [{self.lo}, {self.hi}]")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


def _lambert_w0_scalar(x: float) -> float:
    if math.isnan(x):
        return math.nan
    if x < -_INV_E:
        # absorb rounding of arguments computed as -1/e
        if x > -_INV_E - 4 * np.finfo(float).eps:
            return -1.0
        raise ValueError(f"lambert_w0 is undefined for x < -1/e (got {x!r})")
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return math.inf
    if abs(x) < _SERIES_CUTOFF:
        return x * (1.0 + x * (-1.0 + x * (1.5 + x * (-8.0 / 3.0 + x * 125.0 / 24.0))))

    if x >= 0.0:
        w = math.log1p(x)
        if x > 3.0:
            # asymptotic start cuts the iteration count for large arguments
            lx = math.log(x)
            w = lx - math.log(lx)
    else:
        q = 2.0 * (math.e * x + 1.0)
        p = math.sqrt(max(q, 0.0))
        w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p ** 3
        if w <= -1.0:
            return -1.0

    for _ in range(100):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        if wp1 == 0.0:
            break
        denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1)
        step = f / denom
        w -= step
        if abs(step) <= 1e-15 * (1.0 + abs(w)):
            return w
    return w


def lambert_w0(x):
    """Principal branch of the Lambert W function.

    Solves ``w * exp(w) = x`` for ``w >= -1`` by Halley iteration. Arguments
    below ``1e-4`` in magnitude use a fifth-order series instead.

    Parameters
    ----------
    x : float or array_like
        Argument(s), each ``>= -1/e``.

    Returns
    -------
    float or numpy.ndarray
        Same shape as the input.
    """
    if np.ndim(x) == 0:
        return _lambert_w0_scalar(float(x))
    arr = np.asarray(x, dtype=float)
    return np.vectorize(_lambert_w0_scalar, otypes=[float])(arr)


def bisect(f: Callable[[float], float], bracket: RootBracket) -> float:
    """Root of a continuous scalar function on a sign-changing interval.

    Stops when the interval is narrower than ``bracket.tol``, when ``f`` hits
    zero exactly, or when the midpoint stops moving in floating point.
    """
    lo, hi = float(bracket.lo), float(bracket.hi)
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0.0:
        raise ValueError(
            f"interval [{lo}, {hi}] does not bracket a root (f={flo:.3g}, {fhi:.3g})"
        )
    for _ in range(bracket.max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= bracket.tol or mid == lo or mid == hi:
            return mid
        fmid = f(mid)
        if fmid == 0.0:
            return mid
        if (fmid < 0.0) == (flo < 0.0):
            lo, flo = mid, fmid
        else:
            hi = mid
    if hi - lo <= bracket.tol:
        return 0.5 * (lo + hi)
    raise ConvergenceError(f"bisection did not reach tol={bracket.tol} in {bracket.max_iter} steps")


def positive_cubic_root(a2, a3):
    """Unique positive ``p`` with ``a3*p**3 + a2*p**2 = 1``.

    Works elementwise on arrays. Newton's method is started to the right of
    the root, where the convex increasing left-hand side guarantees monotone
    convergence.
    """
    a2 = np.asarray(a2, dtype=float)
    a3 = np.asarray(a3, dtype=float)
    a2, a3 = np.broadcast_arrays(a2, a3)
    if np.any(a2 < 0) or np.any(a3 < 0):
        raise ValueError("cubic coefficients must be nonnegative")
    if np.any((a2 == 0) & (a3 == 0)):
        raise ValueError("at least one cubic coefficient must be positive")

    # each term alone reaching 1 bounds the root from the right
    with np.errstate(divide="ignore"):
        p = np.minimum(1.0 / np.cbrt(a3), 1.0 / np.sqrt(a2))

    for _ in range(200):
        f = (a3 * p + a2) * p * p - 1.0
        fp = (3.0 * a3 * p + 2.0 * a2) * p
        step = f / fp
        p_new = p - step
        done = np.abs(step) <= 4e-16 * p
        p = p_new
        if np.all(done):
            break
    else:
        raise ConvergenceError("positive_cubic_root did not converge")
    return p if p.ndim else float(p)
