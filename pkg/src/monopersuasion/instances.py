"""Seeded random problem instances for oracle batches and property tests."""

from __future__ import annotations

import numpy as np

from .objective import ObjectiveFn
from .priors import BetaMixturePrior, DiscretePrior, PiecewiseUniformPrior

PROB_GRID = 100


def random_discrete_prior(rng: np.random.Generator, n: int, grid: int = PROB_GRID) -> DiscretePrior:
    """Support on a ``grid``-point lattice of [0, 1], integer probability weights."""
    support = np.sort(rng.choice(grid + 1, size=n, replace=False)) / grid
    weights = rng.integers(1, grid, size=n).astype(float)
    probs = weights / weights.sum()
    probs[-1] = 1.0 - probs[:-1].sum()
    return DiscretePrior(support, probs)


def random_affine(rng: np.random.Generator, scale: float = 5.0) -> tuple[float, float]:
    a, b = rng.uniform(-scale, scale, size=2)
    return float(a), float(b)


def random_s_objective(rng: np.random.Generator, affine: bool = True) -> ObjectiveFn:
    omega_M = float(rng.uniform(0.1, 0.9))
    return ObjectiveFn.s_family(omega_M, random_affine(rng) if affine else None)


def random_m_objective(rng: np.random.Generator, affine: bool = True, min_gap: float = 0.05) -> ObjectiveFn:
    while True:
        lo, hi = np.sort(rng.uniform(0.05, 0.95, size=2))
        if hi - lo >= min_gap:
            break
    return ObjectiveFn.m_family(float(lo), float(hi), random_affine(rng) if affine else None)


def random_piecewise_uniform(rng: np.random.Generator, pieces: int | None = None) -> PiecewiseUniformPrior:
    k = int(pieces or rng.integers(2, 6))
    inner = np.sort(rng.choice(np.arange(1, 100), size=k - 1, replace=False)) / 100
    edges = np.concatenate([[0.0], inner, [1.0]])
    w = rng.uniform(0.2, 1.0, size=k)
    w /= w.sum()
    return PiecewiseUniformPrior([[edges[i], edges[i + 1], w[i]] for i in range(k)])


def random_beta_mixture(rng: np.random.Generator, components: int | None = None) -> BetaMixturePrior:
    k = int(components or rng.integers(1, 4))
    ab = rng.uniform(1.0, 6.0, size=(k, 2))
    w = rng.uniform(0.2, 1.0, size=k)
    w /= w.sum()
    return BetaMixturePrior([[ab[i, 0], ab[i, 1], w[i]] for i in range(k)])


def random_outlets(rng: np.random.Generator, count: int) -> list[float]:
    return sorted((rng.choice(np.arange(1, 100), size=count, replace=False) / 100).tolist())
