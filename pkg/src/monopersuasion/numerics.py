"""Scalar root bracketing and quadrature used by the solvers."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

BISECT_XTOL = 1e-12
BISECT_MAXITER = 200


def bisect(f: Callable[[float], float], lo: float, hi: float,
           xtol: float = BISECT_XTOL, maxiter: int = BISECT_MAXITER) -> float:
    """Root of ``f`` in ``[lo, hi]`` given a sign change between the endpoints.

    Stops once the bracket is narrower than ``xtol`` or cannot shrink further
    in floating point. An exact zero at an endpoint is returned as is.
    """
    flo, fhi = float(f(lo)), float(f(hi))
    if flo == 0.0:
        return float(lo)
    if fhi == 0.0:
        return float(hi)
    if (flo > 0) == (fhi > 0):
        raise ValueError(f"no sign change on [{lo}, {hi}]: f = {flo:.3g}, {fhi:.3g}")
    for _ in range(maxiter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= xtol or mid <= lo or mid >= hi:
            break
        fm = float(f(mid))
        if fm == 0.0:
            return float(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
    # the endpoint with the smaller residual
    return float(lo) if abs(flo) <= abs(fhi) else float(hi)


def sign_change_brackets(x: np.ndarray, y: np.ndarray) -> list[tuple[float, float]]:
    """Adjacent grid cells on which ``y`` changes sign; exact zeros give a degenerate bracket."""
    out = []
    for i in range(len(x)):
        if y[i] == 0.0:
            out.append((float(x[i]), float(x[i])))
        elif i + 1 < len(x) and y[i + 1] != 0.0 and (y[i] > 0) != (y[i + 1] > 0):
            out.append((float(x[i]), float(x[i + 1])))
    return out


def find_roots(f: Callable[[float], float], grid: np.ndarray,
               xtol: float = BISECT_XTOL) -> list[float]:
    """All roots of ``f`` bracketed by the sampling grid, refined by bisection."""
    y = np.array([float(f(t)) for t in grid])
    roots = []
    for lo, hi in sign_change_brackets(grid, y):
        roots.append(lo if lo == hi else bisect(f, lo, hi, xtol=xtol))
    return roots


def adaptive_simpson(f: Callable[[float], float], a: float, b: float,
                     tol: float = 1e-12, max_depth: int = 50) -> float:
    """Adaptive Simpson quadrature with Richardson correction."""
    if b <= a:
        return 0.0
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth)


def _simpson_step(f, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    delta = left + right - whole
    if depth <= 0 or abs(delta) <= 15.0 * tol or not math.isfinite(delta):
        return left + right + delta / 15.0
    return (_simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + _simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1))
