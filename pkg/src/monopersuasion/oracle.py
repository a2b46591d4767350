"""Brute-force baselines that share no code path with the solvers.

Discrete: exhaustive enumeration of monotone (consecutive-block) partitions
or of all set partitions, with block values tabulated once per instance.
Continuous: exhaustive evaluation over uniform parameter grids.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import TooLarge
from .objective import ObjectiveFn
from .priors import ContinuousPrior, DiscretePrior
from .signals import MonotonePartition, SetPartition

MONOTONE_CAP = 25
ALL_CAP = 10
TIE_TOL = 1e-12


def _check_cap(n: int, kind: str) -> None:
    if kind not in ("monotone", "all"):
        raise ValueError(f"kind must be 'monotone' or 'all', got {kind!r}")
    cap = MONOTONE_CAP if kind == "monotone" else ALL_CAP
    if n < 1:
        raise ValueError("n must be positive")
    if n > cap:
        raise TooLarge(f"{kind} enumeration is capped at n={cap}, got n={n}")


def enumerate_partitions(n: int, kind: str = "monotone") -> Iterator[MonotonePartition | SetPartition]:
    """Stream partitions of ``0..n-1``.

    ``monotone`` yields the 2**(n-1) consecutive-block partitions, ordered by
    the bitmask of cut positions. ``all`` yields the Bell(n) set partitions in
    restricted-growth-string order.
    """
    _check_cap(n, kind)
    if kind == "monotone":
        for mask in range(1 << (n - 1)):
            yield MonotonePartition.from_cuts(n, (c for c in range(n - 1) if mask >> c & 1))
    else:
        for rgs in _restricted_growth(n):
            yield _rgs_to_partition(rgs)


def _restricted_growth(n: int, prefix: tuple[int, ...] = (0,)) -> Iterator[tuple[int, ...]]:
    if len(prefix) == n:
        yield prefix
        return
    top = max(prefix) + 1
    for b in range(top + 1):
        yield from _restricted_growth(n, prefix + (b,))


def _rgs_to_partition(rgs) -> SetPartition:
    blocks: dict[int, list[int]] = {}
    for i, b in enumerate(rgs):
        blocks.setdefault(b, []).append(i)
    return SetPartition(tuple(tuple(v) for v in blocks.values()))


def _subset_values(prior: DiscretePrior, V: ObjectiveFn) -> np.ndarray:
    """Value ``mass * V(mean)`` of pooling every subset, indexed by bitmask."""
    n = prior.n
    masks = np.arange(1 << n)
    member = (masks[:, None] >> np.arange(n)) & 1
    mass = member @ prior.probs
    wsum = member @ (prior.probs * prior.support)
    out = np.zeros(1 << n)
    nz = mass > 0
    out[nz] = mass[nz] * V(wsum[nz] / mass[nz])
    return out


def _block_values(prior: DiscretePrior, V: ObjectiveFn) -> list[list[float]]:
    n = prior.n
    table = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            f = prior.probs[i:j + 1]
            mass = float(f.sum())
            table[i][j] = mass * float(V(float(np.dot(prior.support[i:j + 1], f)) / mass))
    return table


@dataclass(frozen=True)
class BruteForceResult:
    best: tuple[MonotonePartition | SetPartition, ...]
    value: float
    count: int
    kind: str


def _scan_monotone(table, n, lo, hi):
    vals = []
    for mask in range(lo, hi):
        total, start = 0.0, 0
        for c in range(n - 1):
            if mask >> c & 1:
                total += table[start][c]
                start = c + 1
        total += table[start][n - 1]
        vals.append(total)
    return vals


def _scan_all(subset_vals, n, first_two):
    out = []
    for rgs in _restricted_growth(n, first_two):
        bm: dict[int, int] = {}
        for i, b in enumerate(rgs):
            bm[b] = bm.get(b, 0) | (1 << i)
        out.append((rgs, sum(subset_vals[m] for m in bm.values())))
    return out


def _workers(workers: int | None) -> int:
    if workers is None:
        workers = int(os.environ.get("MP_SOLVER_THREADS", "1") or 1)
    return max(1, workers)


def brute_force(prior: DiscretePrior, V: ObjectiveFn, kind: str = "monotone",
                workers: int | None = None, tol: float = TIE_TOL) -> BruteForceResult:
    """Exhaustive maximum of the pooled value over partitions of the support.

    Pooled means are taken per block whether or not the block is consecutive.
    Every partition within ``tol`` of the maximum is returned, in enumeration
    order. ``workers > 1`` shards the enumeration by prefix across processes
    (default from ``MP_SOLVER_THREADS``); the reduction is order-preserving,
    so the result does not depend on the worker count.
    """
    n = prior.n
    _check_cap(n, kind)
    nw = _workers(workers)
    if kind == "monotone":
        table = _block_values(prior, V)
        total = 1 << (n - 1)
        if nw > 1 and total >= 1024:
            bounds = np.linspace(0, total, nw + 1).astype(int)
            with ProcessPoolExecutor(nw) as ex:
                parts = ex.map(_scan_monotone, [table] * nw, [n] * nw, bounds[:-1], bounds[1:])
                vals = [v for part in parts for v in part]
        else:
            vals = _scan_monotone(table, n, 0, total)
        best = max(vals)
        winners = tuple(
            MonotonePartition.from_cuts(n, (c for c in range(n - 1) if mask >> c & 1))
            for mask, v in enumerate(vals) if v >= best - tol)
        return BruteForceResult(winners, float(best), total, kind)

    subset_vals = _subset_values(prior, V).tolist()
    prefixes = [(0,)] if n == 1 else [(0, 0), (0, 1)]
    if nw > 1 and n >= 8:
        with ProcessPoolExecutor(min(nw, 2)) as ex:
            chunks = list(ex.map(_scan_all, [subset_vals] * 2, [n] * 2, prefixes))
    else:
        chunks = [_scan_all(subset_vals, n, p) for p in prefixes]
    rows = [r for c in chunks for r in c]
    best = max(v for _, v in rows)
    winners = tuple(_rgs_to_partition(rgs) for rgs, v in rows if v >= best - tol)
    return BruteForceResult(winners, float(best), len(rows), kind)


@dataclass(frozen=True)
class GridResult:
    family: str
    params: dict
    value: float
    K: int


def grid_search_continuous(prior, V: ObjectiveFn, K: int = 400,
                           family: str = "interval_disclosure") -> GridResult:
    """Grid maximum over a parameterized signal family.

    * ``interval_disclosure``: cutoff pairs ``w_lo <= w_hi`` on a K-point grid
      of [0, 1]; pool below ``w_lo`` and above ``w_hi``.
    * ``bipooling_pairs``: pairs ``w_lo < w_hi``; pool the middle interval into
      one realization and its complement into another.
    * ``stochastic_uc_z``: K points on the upper-censorship walk of a discrete prior.
    """
    if K < 100:
        raise ValueError("K must be at least 100")
    if family == "stochastic_uc_z":
        return _grid_uc_z(prior, V, K)
    if not isinstance(prior, ContinuousPrior):
        raise ValueError(f"{family} needs a continuous prior")
    x = np.linspace(0.0, 1.0, K)
    F = prior.cdf(x)
    M = prior.partial_mean(x)
    E = prior.mean
    if family == "interval_disclosure":
        low = _pooled(V, F, M)
        high = _pooled(V, 1.0 - F, E - M)
        inner = prior.expect_poly(V.coeffs, 0.0, x)
        val = low[:, None] + (inner[None, :] - inner[:, None]) + high[None, :]
        return _grid_argmax(family, x, val, K, strict=False)
    if family == "bipooling_pairs":
        mid_mass = F[None, :] - F[:, None]
        mid_sum = M[None, :] - M[:, None]
        val = _pooled(V, mid_mass, mid_sum) + _pooled(V, 1.0 - mid_mass, E - mid_sum)
        return _grid_argmax(family, x, val, K, strict=True)
    raise ValueError(f"unknown family {family!r}")


def _pooled(V: ObjectiveFn, mass, wsum):
    """``mass * V(wsum / mass)``, zero where the mass vanishes."""
    mass = np.asarray(mass, dtype=float)
    ok = mass > 0.0
    mean = np.clip(np.asarray(wsum) / np.where(ok, mass, 1.0), 0.0, 1.0)
    return np.where(ok, mass * V(mean), 0.0)


def _grid_argmax(family, x, val, K, strict):
    keep = np.triu(np.ones((K, K), dtype=bool), 1 if strict else 0)
    val = np.where(keep, val, -np.inf)
    i, j = np.unravel_index(int(np.argmax(val)), val.shape)
    return GridResult(family, {"omega_L": float(x[i]), "omega_R": float(x[j])}, float(val[i, j]), K)


def _grid_uc_z(prior: DiscretePrior, V: ObjectiveFn, K: int) -> GridResult:
    # evaluated from the definition, block by block, without the solver's walk tables
    w, f = prior.support, prior.probs
    n = prior.n
    zs = np.linspace(w[0], w[-1], K)
    best_v, best = -np.inf, None
    for z in zs:
        j = int(np.searchsorted(w, z, side="right") - 1)
        q = 0.0 if j >= n - 1 else (z - w[j]) / (w[j + 1] - w[j])
        pooled_mass = (1 - q) * f[j] + f[j + 1:].sum()
        pooled_mean = ((1 - q) * f[j] * w[j] + np.dot(f[j + 1:], w[j + 1:])) / pooled_mass
        v = float(np.dot(f[:j], V(w[:j]))) + q * f[j] * float(V(w[j])) + pooled_mass * float(V(pooled_mean))
        if v > best_v:
            best_v, best = v, {"z": float(z), "cutoff_index": j, "q": float(q), "pooled_mean": float(pooled_mean)}
    return GridResult("stochastic_uc_z", best, float(best_v), K)
