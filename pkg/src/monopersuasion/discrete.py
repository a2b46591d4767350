"""Discrete state, s-shaped objective: stochastic and deterministic upper censorship.

Stochastic upper censorship signals are indexed by a walk position
``z in [w_1, w_n]``: ``j(z)`` is the last support point at or below ``z`` and
``q(z)`` the fraction of the way to the next one. The value ``W(z)`` has slope
proportional to ``tangent_gap(V, w_j(z), m(z))``, which for s-shaped ``V``
crosses zero at most once, from above. The unrestricted optimum sits at that
crossing; the monotone optimum is one of the two support points around it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import ShapeError
from .numerics import BISECT_MAXITER, BISECT_XTOL
from .objective import ObjectiveFn, ShapeReport, classify_shape, tangent_gap
from .priors import DiscretePrior, PosteriorDistribution, induce_distribution
from .signals import MonotonePartition, StochasticUpperCensorship

TIE_TOL = 1e-12


class WalkPoint(NamedTuple):
    j: np.ndarray
    q: np.ndarray
    m: np.ndarray
    W: np.ndarray
    delta: np.ndarray


@dataclass(frozen=True)
class MonotoneSolutionDiscrete:
    best_partitions: tuple[MonotonePartition, ...]
    value: float
    # (cutoff index, q in {0, 1}) relative to the unrestricted cutoff, one per partition
    uc_forms: tuple[tuple[int, int], ...]
    omega_star_index: int
    omega_star: float
    stochastic: StochasticUpperCensorship | None = None
    shape: str = "s_shaped"
    candidate_values: dict = field(default_factory=dict)

    @property
    def canonical(self) -> MonotonePartition:
        return self.best_partitions[0]


def partition_value(prior: DiscretePrior, V: ObjectiveFn, p: MonotonePartition) -> float:
    """Sum over blocks of block mass times ``V`` at the block's pooled mean."""
    p.validate(prior.n)
    total = 0.0
    for i, j in p.blocks:
        f = prior.probs[i:j + 1]
        mass = f.sum()
        total += mass * float(V(np.dot(prior.support[i:j + 1], f) / mass))
    return float(total)


class _Walk:
    """Suffix sums for evaluating the upper-censorship walk at many ``z``."""

    def __init__(self, prior: DiscretePrior, V: ObjectiveFn):
        self.w, self.f = prior.support, prior.probs
        self.n = prior.n
        self.V = V
        tail_f = np.concatenate([np.cumsum(self.f[::-1])[::-1][1:], [0.0]])
        tail_wf = np.concatenate([np.cumsum((self.w * self.f)[::-1])[::-1][1:], [0.0]])
        self.tail_f, self.tail_wf = tail_f, tail_wf  # sums over i > j
        vf = self.f * V(self.w)
        self.head_v = np.concatenate([[0.0], np.cumsum(vf)[:-1]])  # sums over i < j

    def locate(self, z):
        z = np.asarray(z, dtype=float)
        j = np.clip(np.searchsorted(self.w, z, side="right") - 1, 0, self.n - 1)
        nxt = np.minimum(j + 1, self.n - 1)
        gap = self.w[nxt] - self.w[j]
        with np.errstate(invalid="ignore", divide="ignore"):
            q = np.where(j < self.n - 1, (z - self.w[j]) / np.where(gap > 0, gap, 1.0), 0.0)
        return j, np.clip(q, 0.0, 1.0)

    def at(self, j, q) -> WalkPoint:
        j = np.asarray(j)
        q = np.asarray(q, dtype=float)
        fj, wj = self.f[j], self.w[j]
        pooled = (1.0 - q) * fj + self.tail_f[j]
        m = ((1.0 - q) * fj * wj + self.tail_wf[j]) / pooled
        W = self.head_v[j] + q * fj * self.V(wj) + pooled * self.V(m)
        return WalkPoint(j, q, m, W, tangent_gap(self.V, wj, m))


def uc_walk(prior: DiscretePrior, V: ObjectiveFn, z) -> WalkPoint:
    """``(j(z), q(z), m(z), W(z), Delta)`` for scalar or array ``z`` in ``[w_1, w_n]``.

    ``j`` is a 0-based index. ``Delta = tangent_gap(V, w_j, m)`` is the sign of
    the slope of ``W``.
    """
    z = np.asarray(z, dtype=float)
    if np.any(z < prior.support[0]) or np.any(z > prior.support[-1]):
        raise ValueError("z must lie in [w_1, w_n]")
    walk = _Walk(prior, V)
    pt = walk.at(*walk.locate(z))
    if z.ndim == 0:
        return WalkPoint(*(x.item() if isinstance(x, np.ndarray) else x for x in pt))
    return pt


def _require_s_shaped(V: ObjectiveFn, shape: ShapeReport | None) -> ShapeReport:
    shape = shape or classify_shape(V)
    if shape.kind != "s_shaped":
        raise ShapeError(f"{V.description} is {shape.kind}; an s-shaped objective is required",
                         module="discrete_solver")
    return shape


def _make_uc(walk: _Walk, j: int, q: float, case: str) -> StochasticUpperCensorship:
    pt = walk.at(j, q)
    z = walk.w[j] + q * (walk.w[j + 1] - walk.w[j]) if j < walk.n - 1 else walk.w[j]
    return StochasticUpperCensorship(int(j), float(walk.w[j]), float(q), float(pt.m),
                                     float(pt.W), float(z), case)


def solve_stochastic_uc(prior: DiscretePrior, V: ObjectiveFn, shape: ShapeReport | None = None,
                        xtol: float = BISECT_XTOL) -> StochasticUpperCensorship:
    """Optimal unrestricted signal: stochastic upper censorship.

    Scans the walk segment by segment for the first place where ``Delta``
    stops being positive, then bisects on ``z`` inside that segment. The
    ``case`` field of the result is one of

    * ``"interior"``: ``Delta(w*, m*) = 0`` with ``q*`` in (0, 1)
    * ``"no_disclosure"``: ``Delta <= 0`` already at ``z = w_1``
    * ``"knot"``: ``Delta`` jumps from positive to non-positive at a support
      point, so the optimum is deterministic with ``q* = 0`` and only the
      weak form ``Delta(w*, m*) <= 0`` holds
    * ``"full_disclosure"``: ``Delta > 0`` along the whole walk
    """
    _require_s_shaped(V, shape)
    walk = _Walk(prior, V)
    n = walk.n
    if n == 1:
        return _make_uc(walk, 0, 0.0, "no_disclosure")

    for j in range(n - 1):
        d_start = walk.at(j, 0.0).delta
        if d_start <= 0.0:
            return _make_uc(walk, j, 0.0, "no_disclosure" if j == 0 else "knot")
        d_end = walk.at(j, 1.0).delta
        if d_end > 0.0:
            continue
        lo, hi = walk.w[j], walk.w[j + 1]
        gap = hi - lo
        qlo, qhi = 0.0, 1.0
        for _ in range(BISECT_MAXITER):
            qm = 0.5 * (qlo + qhi)
            if (qhi - qlo) * gap <= xtol or qm <= qlo or qm >= qhi:
                break
            d = walk.at(j, qm).delta
            if d > 0.0:
                qlo = qm
            elif d < 0.0:
                qhi = qm
            else:
                qlo = qhi = qm
                break
        dlo, dhi = walk.at(j, qlo).delta, walk.at(j, qhi).delta
        q = qlo if abs(dlo) <= abs(dhi) else qhi
        return _make_uc(walk, j, q, "interior")
    return _make_uc(walk, n - 1, 0.0, "full_disclosure")


def tangency_residual(V: ObjectiveFn, s: StochasticUpperCensorship) -> float:
    """``V(m*) + V'(m*)(w* - m*) - V(w*)``: zero at interior optima, >= 0 at boundaries."""
    return -tangent_gap(V, s.cutoff_state, s.pooled_mean)


def uc_label(pooled_from: int) -> tuple[int, int]:
    """Canonical ``(cutoff index, q)`` for an upper-censorship partition.

    The same partition is both ``(k, 1)`` and ``(k + 1, 0)``; ``q = 1`` is
    preferred, which is only impossible when nothing is separated.
    """
    return (0, 0) if pooled_from == 0 else (pooled_from - 1, 1)


def solve_monotone_discrete(prior: DiscretePrior, V: ObjectiveFn,
                            shape: ShapeReport | None = None) -> MonotoneSolutionDiscrete:
    """Optimal monotone signal for a discrete prior.

    For s-shaped ``V`` this is deterministic upper censorship at the
    unrestricted cutoff ``w*`` with ``q`` in {0, 1}. Both candidates are
    evaluated; on a tie (within 1e-12) both are returned, the one separating
    fewer states first. Convex, concave and affine objectives take the
    full-disclosure / no-disclosure shortcuts.
    """
    shape = shape or classify_shape(V)
    n = prior.n
    full, none = MonotonePartition.full_disclosure(n), MonotonePartition.no_disclosure(n)
    if shape.kind in ("convex", "concave", "affine") or n == 1:
        if n == 1 or shape.kind == "concave":
            picks, k = [none], 0
        elif shape.kind == "convex":
            picks, k = [full], n - 1
        else:
            picks, k = [none, full], 0
        value = partition_value(prior, V, picks[0])
        forms = tuple((0, 0) if p == none else (n - 1, 0) for p in picks)
        return MonotoneSolutionDiscrete(tuple(picks), value, forms, k, float(prior.support[k]),
                                        None, shape.kind)
    _require_s_shaped(V, shape)

    stoch = solve_stochastic_uc(prior, V, shape)
    k = stoch.cutoff_index
    cands = {0: MonotonePartition.upper_censorship(n, k)}
    if k + 1 <= n - 1:
        cands[1] = MonotonePartition.upper_censorship(n, k + 1)
    values = {q: partition_value(prior, V, p) for q, p in cands.items()}
    best = max(values.values())
    winners = [q for q in sorted(values) if values[q] >= best - TIE_TOL]
    return MonotoneSolutionDiscrete(
        best_partitions=tuple(cands[q] for q in winners),
        value=float(values[winners[0]]),
        uc_forms=tuple((k, q) for q in winners),
        omega_star_index=k,
        omega_star=float(prior.support[k]),
        stochastic=stoch,
        shape=shape.kind,
        candidate_values={q: float(v) for q, v in values.items()},
    )


def stochastic_uc_distribution(prior: DiscretePrior, s: StochasticUpperCensorship) -> PosteriorDistribution:
    return induce_distribution(prior, s)


def walk_curve(prior: DiscretePrior, V: ObjectiveFn, K: int) -> tuple[WalkPoint, np.ndarray]:
    """The walk on ``K`` uniformly spaced points of ``[w_1, w_n]`` (one point: ``w_1``)."""
    if K < 1:
        raise ValueError("K must be positive")
    z = np.linspace(prior.support[0], prior.support[-1], K) if K > 1 else prior.support[:1].copy()
    walk = _Walk(prior, V)
    pt = walk.at(*walk.locate(z))
    return WalkPoint(pt.j, pt.q, pt.m, pt.W, pt.delta), z
