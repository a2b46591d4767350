"""Objective functions of the posterior mean and their curvature geometry.

Every supported objective is a polynomial on [0, 1]. The canonical families
are parameterized by their second derivative, so the curvature pattern is
guaranteed by construction:

* s-family: ``V''(m) = omega_M - m`` (convex, then concave)
* m-family: ``V''(m) = (m - omega_L) * (omega_R - m)`` (concave, convex, concave)

Both integrate with ``V(0) = V'(0) = 0`` before the optional affine addend.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np
from numpy.polynomial import Polynomial

from .errors import NoBitangent, ShapeUnrecognized
from .numerics import bisect

SHAPE_KINDS = ("convex", "concave", "affine", "s_shaped", "m_shaped", "other")


@dataclass(frozen=True)
class ObjectiveFn:
    """Polynomial objective ``V(m) = sum_k coeffs[k] * m**k``."""

    coeffs: tuple[float, ...]
    description: str = "polynomial"
    # round-trip information for the JSON fragment
    spec: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        c = tuple(float(x) for x in self.coeffs)
        if not c:
            c = (0.0,)
        if not all(math.isfinite(x) for x in c):
            raise ValueError("objective coefficients must be finite")
        object.__setattr__(self, "coeffs", c)

    # -- constructors -------------------------------------------------------

    @classmethod
    def polynomial(cls, coeffs: Sequence[float], affine: Sequence[float] | None = None,
                   description: str | None = None) -> "ObjectiveFn":
        c = list(map(float, coeffs)) + [0.0, 0.0]
        a, b = _affine_pair(affine)
        c[0] += b
        c[1] += a
        spec = {"kind": "polynomial", "coeffs": list(map(float, coeffs))}
        if affine is not None:
            spec["affine"] = [a, b]
        return cls(tuple(_trim(c)), description or "polynomial", spec)

    @classmethod
    def s_family(cls, omega_M: float, affine: Sequence[float] | None = None) -> "ObjectiveFn":
        if not 0.0 < omega_M < 1.0:
            raise ValueError(f"omega_M must lie in (0, 1), got {omega_M}")
        a, b = _affine_pair(affine)
        c = (b, a, omega_M / 2.0, -1.0 / 6.0)
        spec = {"kind": "s_family", "omega_M": float(omega_M), "affine": [a, b]}
        return cls(c, f"s_family(omega_M={omega_M:g})", spec)

    @classmethod
    def m_family(cls, omega_L: float, omega_R: float,
                 affine: Sequence[float] | None = None) -> "ObjectiveFn":
        if not 0.0 < omega_L < omega_R < 1.0:
            raise ValueError(f"need 0 < omega_L < omega_R < 1, got {omega_L}, {omega_R}")
        a, b = _affine_pair(affine)
        s, p = omega_L + omega_R, omega_L * omega_R
        c = (b, a, -p / 2.0, s / 6.0, -1.0 / 12.0)
        spec = {"kind": "m_family", "omega_L": float(omega_L), "omega_R": float(omega_R),
                "affine": [a, b]}
        return cls(c, f"m_family(omega_L={omega_L:g}, omega_R={omega_R:g})", spec)

    @classmethod
    def from_dict(cls, d: dict) -> "ObjectiveFn":
        kind = d.get("kind")
        affine = d.get("affine")
        if kind == "polynomial":
            return cls.polynomial(d["coeffs"], affine)
        if kind == "s_family":
            return cls.s_family(float(d["omega_M"]), affine)
        if kind == "m_family":
            return cls.m_family(float(d["omega_L"]), float(d["omega_R"]), affine)
        raise ValueError(f"unknown objective kind {kind!r}")

    def to_dict(self) -> dict:
        return dict(self.spec) if self.spec else {"kind": "polynomial", "coeffs": list(self.coeffs)}

    def with_affine(self, a: float, b: float) -> "ObjectiveFn":
        """Return ``V(m) + a*m + b``; the curvature is untouched."""
        c = list(self.coeffs) + [0.0, 0.0]
        c[0] += b
        c[1] += a
        spec = dict(self.spec)
        if spec:
            a0, b0 = spec.get("affine", [0.0, 0.0])
            spec["affine"] = [a0 + a, b0 + b]
        return ObjectiveFn(tuple(_trim(c)), f"{self.description} + {a:g}*m + {b:g}", spec)

    # -- evaluation ---------------------------------------------------------

    @cached_property
    def poly(self) -> Polynomial:
        return Polynomial(self.coeffs)

    @cached_property
    def _d1(self) -> Polynomial:
        return self.poly.deriv(1)

    @cached_property
    def _d2(self) -> Polynomial:
        return self.poly.deriv(2)

    @cached_property
    def _curvature_slope(self) -> Polynomial:
        # V' with its constant term dropped; identical for every affine shift of V
        return self._d2.integ()

    @cached_property
    def _taylor(self) -> list[Polynomial]:
        # V^(k)(m) / k! for k >= 2
        out = []
        p = self._d2
        k = 2
        while True:
            out.append(p / math.factorial(k))
            if p.degree() <= 0:
                break
            p = p.deriv()
            k += 1
        return out

    def __call__(self, m):
        return self.poly(m)

    def eval(self, m):
        return self.poly(m)

    def deriv1(self, m):
        return self._d1(m)

    def deriv2(self, m):
        return self._d2(m)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1


def _affine_pair(affine) -> tuple[float, float]:
    if affine is None:
        return 0.0, 0.0
    a, b = affine
    return float(a), float(b)


def _trim(c: list[float]) -> list[float]:
    while len(c) > 1 and c[-1] == 0.0:
        c.pop()
    return c


@dataclass(frozen=True)
class ShapeReport:
    kind: str
    inflections: tuple[float, ...] = ()

    @property
    def omega_M(self) -> float:
        if self.kind != "s_shaped":
            raise AttributeError("omega_M is only defined for s-shaped objectives")
        return self.inflections[0]

    @property
    def omega_L(self) -> float:
        if self.kind != "m_shaped":
            raise AttributeError("omega_L is only defined for m-shaped objectives")
        return self.inflections[0]

    @property
    def omega_R(self) -> float:
        if self.kind != "m_shaped":
            raise AttributeError("omega_R is only defined for m-shaped objectives")
        return self.inflections[1]


@dataclass(frozen=True)
class Bitangent:
    m_L: float
    m_R: float
    slope: float
    intercept: float

    def line(self, x):
        return self.intercept + self.slope * np.asarray(x, dtype=float)


def classify_shape(V: ObjectiveFn, grid_points: int = 1001, tol: float = 1e-12) -> ShapeReport:
    """Detect the curvature pattern of ``V`` on [0, 1] from the sign of ``V''``.

    Samples ``V''`` on a uniform grid; values within ``tol`` of zero count as
    zero. Isolated zeros are ignored, but a run of zeros (``V''`` vanishing on
    an interval) is rejected unless ``V''`` vanishes everywhere. Inflection
    points are refined by bisection on ``V''``.

    Raises:
        ShapeUnrecognized: more than two sign changes, or a flat stretch of
            ``V''`` inside the domain.
    """
    if grid_points < 101:
        raise ValueError("grid_points must be at least 101")
    x = np.linspace(0.0, 1.0, grid_points)
    s = V.deriv2(x)
    sign = np.where(s > tol, 1, np.where(s < -tol, -1, 0))
    if not sign.any():
        return ShapeReport("affine")
    zero = sign == 0
    if np.any(zero[1:] & zero[:-1]):
        raise ShapeUnrecognized(
            f"{V.description}: second derivative vanishes on an interval; "
            "strict curvature regions are required")

    nz = np.flatnonzero(sign)
    runs = [int(sign[nz[0]])]
    brackets = []
    for i, k in zip(nz[:-1], nz[1:]):
        if sign[k] != sign[i]:
            runs.append(int(sign[k]))
            brackets.append((x[i], x[k]))
    if len(runs) > 3:
        raise ShapeUnrecognized(
            f"{V.description}: {len(runs) - 1} curvature sign changes on [0, 1]")

    inflections = tuple(bisect(V.deriv2, lo, hi, xtol=1e-12) for lo, hi in brackets)
    pattern = tuple(runs)
    kind = {
        (1,): "convex",
        (-1,): "concave",
        (1, -1): "s_shaped",
        (-1, 1, -1): "m_shaped",
    }.get(pattern, "other")
    return ShapeReport(kind, inflections)


def tangent_gap(V: ObjectiveFn, omega, m):
    """Height of ``V`` at ``omega`` above its tangent line drawn at ``m``.

    ``V(omega) - V(m) - V'(m) * (omega - m)``, evaluated as the Taylor tail
    ``sum_{k>=2} V^(k)(m)/k! * (omega - m)**k``. That form is exact for
    polynomials, avoids cancellation, and is bitwise unchanged when an affine
    function is added to ``V``.
    """
    omega = np.asarray(omega, dtype=float)
    m = np.asarray(m, dtype=float)
    h = omega - m
    acc = np.zeros(np.broadcast(omega, m).shape)
    for c in reversed(V._taylor):
        acc = acc * h + c(m)
    out = acc * h * h
    return float(out) if out.ndim == 0 else out


def _upper_hull(x: np.ndarray, y: np.ndarray) -> list[int]:
    hull: list[int] = []
    for i in range(len(x)):
        while len(hull) >= 2:
            i0, i1 = hull[-2], hull[-1]
            cross = (x[i1] - x[i0]) * (y[i] - y[i0]) - (y[i1] - y[i0]) * (x[i] - x[i0])
            if cross >= 0:
                hull.pop()
            else:
                break
        hull.append(i)
    return hull


def _bitangent_residual(V: ObjectiveFn, a: float, b: float) -> np.ndarray:
    g = V._curvature_slope
    return np.array([g(a) - g(b), tangent_gap(V, b, a)])


def solve_bitangent(V: ObjectiveFn, shape: ShapeReport | None = None,
                    grid_points: int = 1001, max_iter: int = 200) -> Bitangent:
    """Common tangent touching ``V`` from above at two points ``m_L < m_R``.

    The starting pair is the longest edge of the upper concave hull of ``V``
    sampled on a grid, i.e. the local maximizers of ``V`` net of the chord
    slope. A damped Newton iteration (step halving until the residual norm
    decreases) then solves ``V'(m_L) = V'(m_R)`` and
    ``V(m_R) = V(m_L) + V'(m_L) (m_R - m_L)``.
    """
    if shape is None:
        shape = classify_shape(V)
    if shape.kind != "m_shaped":
        raise NoBitangent(f"{V.description} is {shape.kind}, not m-shaped")
    wL, wR = shape.inflections

    x = np.linspace(0.0, 1.0, grid_points)
    hull = _upper_hull(x, V(x))
    gaps = np.diff(hull)
    if gaps.size == 0 or gaps.max() <= 1:
        raise NoBitangent(f"{V.description}: V is concave on the sampling grid")
    k = int(np.argmax(gaps))
    a, b = x[hull[k]], x[hull[k + 1]]
    if hull[k] == 0:
        a = 0.5 * wL
    if hull[k + 1] == grid_points - 1:
        b = 0.5 * (1.0 + wR)

    r = _bitangent_residual(V, a, b)
    norm = float(np.linalg.norm(r))
    converged = False
    for _ in range(max_iter):
        if norm == 0.0:
            converged = True
            break
        d2a, d2b = float(V.deriv2(a)), float(V.deriv2(b))
        J = np.array([[d2a, -d2b], [-d2a * (b - a), -r[0]]])
        try:
            step = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            break
        t = 1.0
        improved = False
        while t > 1e-12:
            na, nb = a + t * step[0], b + t * step[1]
            nr = _bitangent_residual(V, na, nb)
            nnorm = float(np.linalg.norm(nr))
            if nnorm < norm:
                improved = True
                break
            t *= 0.5
        if not improved:
            converged = norm < 1e-12
            break
        a, b, r, norm = na, nb, nr, nnorm
    else:
        converged = norm < 1e-12

    if not converged:
        raise NoBitangent(f"{V.description}: Newton iteration did not converge (residual {norm:.3g})")
    if not (0.0 < a < wL and wR < b < 1.0):
        raise NoBitangent(
            f"{V.description}: tangency points ({a:.6g}, {b:.6g}) are not inside "
            "the two concave regions of (0, 1)")
    slope = float(V.deriv1(a))
    return Bitangent(float(a), float(b), slope, float(V(a)) - slope * float(a))


def concavify_at(V: ObjectiveFn, bt: Bitangent, x):
    """Concave envelope of an m-shaped ``V``: the bitangent chord on [m_L, m_R], ``V`` elsewhere."""
    x = np.asarray(x, dtype=float)
    vl, vr = float(V(bt.m_L)), float(V(bt.m_R))
    w = (x - bt.m_L) / (bt.m_R - bt.m_L)
    chord = vl * (1.0 - w) + vr * w
    inside = (x >= bt.m_L) & (x <= bt.m_R)
    out = np.where(inside, chord, V(x))
    return float(out) if out.ndim == 0 else out
