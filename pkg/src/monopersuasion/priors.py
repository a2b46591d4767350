"""Priors over the state in [0, 1] and the posterior-mean distributions signals induce.

Continuous priors are described by their partial moments
``partial_moment(k, x) = integral_0^x w**k dF(w)``, which are closed form for
all three supported representations. Because objectives are polynomials,
expectations of ``V`` over any interval reduce to partial moments as well.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np
from scipy import special

from .errors import EmptyInterval, MalformedSignal
from .numerics import adaptive_simpson, bisect
from .objective import ObjectiveFn
from .signals import (MonotonePartition, PoolingSet, SetPartition,
                      StochasticUpperCensorship, partition_blocks)

MASS_TOL = 1e-12
MERGE_TOL = 1e-12


class DiscretePrior:
    """Finite support ``w_1 < ... < w_n`` in [0, 1] with positive probabilities."""

    kind = "discrete"

    def __init__(self, support: Sequence[float], probs: Sequence[float]):
        support = np.asarray(support, dtype=float)
        probs = np.asarray(probs, dtype=float)
        if support.ndim != 1 or support.size == 0:
            raise ValueError("support must be a non-empty list")
        if probs.shape != support.shape:
            raise ValueError(f"probs has {probs.size} entries, support has {support.size}")
        if np.any(np.diff(support) <= 0):
            raise ValueError("support must be strictly increasing")
        if support[0] < 0.0 or support[-1] > 1.0:
            raise ValueError("support must lie in [0, 1]")
        if np.any(probs <= 0.0):
            raise ValueError("probs must be positive")
        total = float(probs.sum())
        if abs(total - 1.0) > MASS_TOL:
            raise ValueError(f"probs sum to {total:.12g}, expected 1")
        self.support = support
        self.probs = probs
        self.support.flags.writeable = False
        self.probs.flags.writeable = False

    @property
    def n(self) -> int:
        return self.support.size

    @property
    def mean(self) -> float:
        return float(np.dot(self.support, self.probs))

    def block_mass(self, idx) -> float:
        return float(self.probs[list(idx)].sum())

    def block_mean(self, idx) -> float:
        idx = list(idx)
        f = self.probs[idx]
        return float(np.dot(self.support[idx], f) / f.sum())

    def conditional_mean(self, a: float, b: float) -> float:
        mask = (self.support >= a) & (self.support <= b)
        if not mask.any():
            raise EmptyInterval(f"no support point in [{a}, {b}]")
        f = self.probs[mask]
        return float(np.dot(self.support[mask], f) / f.sum())

    def shortfall(self, x):
        """``integral_0^x F(t) dt = E[(x - w)^+]``."""
        x = np.asarray(x, dtype=float)
        return np.sum(self.probs * np.maximum(x[..., None] - self.support, 0.0), axis=-1)

    def to_dict(self) -> dict:
        return {"kind": "discrete", "support": self.support.tolist(), "probs": self.probs.tolist()}

    def __repr__(self):
        pairs = ", ".join(f"{w:g}: {p:g}" for w, p in zip(self.support, self.probs))
        return f"DiscretePrior({{{pairs}}})"


class ContinuousPrior:
    """Atomless prior with a strictly positive density on [0, 1]."""

    kind = "continuous"
    breakpoints: tuple[float, ...] = (0.0, 1.0)

    def partial_moment(self, k: int, x):
        raise NotImplementedError

    def density(self, x):
        raise NotImplementedError

    def cdf(self, x):
        return self.partial_moment(0, x)

    def partial_mean(self, x):
        return self.partial_moment(1, x)

    @property
    def mean(self) -> float:
        return float(self.partial_moment(1, 1.0))

    def mass(self, a, b):
        return self.cdf(b) - self.cdf(a)

    def conditional_mean(self, a: float, b: float) -> float:
        mass = float(self.mass(a, b))
        if not mass > 0.0:
            raise EmptyInterval(f"interval [{a}, {b}] has zero prior mass")
        m = float(self.partial_mean(b) - self.partial_mean(a)) / mass
        return min(max(m, a), b)

    def lower_mean(self, x):
        """``E[w | w <= x]`` for array ``x`` in (0, 1]."""
        return self.partial_mean(x) / self.cdf(x)

    def upper_mean(self, x):
        """``E[w | w >= x]`` for array ``x`` in [0, 1)."""
        return (self.mean - self.partial_mean(x)) / (1.0 - self.cdf(x))

    def expect_poly(self, coeffs: Sequence[float], a, b):
        """``integral_a^b sum_k coeffs[k] w**k dF(w)``."""
        out = 0.0
        for k, c in enumerate(coeffs):
            if c != 0.0:
                out = out + c * (self.partial_moment(k, b) - self.partial_moment(k, a))
        return out

    def quantile(self, p: float) -> float:
        if p <= 0.0:
            return 0.0
        if p >= 1.0:
            return 1.0
        return bisect(lambda x: float(self.cdf(x)) - p, 0.0, 1.0)

    def integrate(self, g: Callable[[float], float], a: float = 0.0, b: float = 1.0,
                  tol: float = 1e-12) -> float:
        """``integral_a^b g dF`` by adaptive Simpson, split at the density's kinks."""
        pts = sorted({a, b, *[t for t in self.breakpoints if a < t < b]})
        h = lambda w: g(w) * float(self.density(w))
        return sum(adaptive_simpson(h, lo, hi, tol) for lo, hi in zip(pts[:-1], pts[1:]))

    def shortfall(self, x):
        x = np.asarray(x, dtype=float)
        return x * self.cdf(x) - self.partial_mean(x)

    def check_density(self, grid_points: int = 1001, tol: float = 1e-12) -> bool:
        x = np.linspace(0.0, 1.0, grid_points)[1:-1]
        return bool(np.all(self.density(x) > tol))


class PiecewiseUniformPrior(ContinuousPrior):
    """Constant density on each piece ``(a, b, mass)``; pieces tile [0, 1]."""

    kind = "piecewise_uniform"

    def __init__(self, pieces: Sequence[Sequence[float]]):
        arr = np.asarray(pieces, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 3 or arr.shape[0] == 0:
            raise ValueError("pieces must be a list of [a, b, mass] triples")
        a, b, mass = arr.T
        if a[0] != 0.0 or b[-1] != 1.0 or np.any(a[1:] != b[:-1]) or np.any(b <= a):
            raise ValueError("pieces must tile [0, 1] in increasing order")
        if np.any(mass <= 0.0):
            raise ValueError("every piece needs positive mass (strictly positive density)")
        total = float(mass.sum())
        if abs(total - 1.0) > 1e-10:
            raise ValueError(f"piece masses sum to {total:.12g}, expected 1")
        self._a, self._b = a, b
        self._mass = mass / total
        self._dens = self._mass / (b - a)
        self.breakpoints = tuple(np.concatenate([a, b[-1:]]).tolist())

    def partial_moment(self, k, x):
        x = np.asarray(x, dtype=float)
        u = np.clip(x[..., None], self._a, self._b)
        terms = self._dens * (u ** (k + 1) - self._a ** (k + 1)) / (k + 1)
        return terms.sum(axis=-1)

    def density(self, x):
        x = np.asarray(x, dtype=float)
        i = np.clip(np.searchsorted(self._b, x, side="left"), 0, len(self._b) - 1)
        return self._dens[i]

    def to_dict(self):
        return {"kind": "piecewise_uniform",
                "pieces": [[float(a), float(b), float(m)] for a, b, m in zip(self._a, self._b, self._mass)]}

    def __repr__(self):
        return f"PiecewiseUniformPrior({self.to_dict()['pieces']})"


class PiecewiseLinearDensityPrior(ContinuousPrior):
    """Density interpolated linearly between knots; rescaled to unit mass."""

    kind = "piecewise_linear_density"

    def __init__(self, knots: Sequence[float], values: Sequence[float]):
        x = np.asarray(knots, dtype=float)
        d = np.asarray(values, dtype=float)
        if x.shape != d.shape or x.size < 2:
            raise ValueError("knots and values must have equal length >= 2")
        if x[0] != 0.0 or x[-1] != 1.0 or np.any(np.diff(x) <= 0):
            raise ValueError("knots must increase from 0 to 1")
        if np.any(d <= 0.0):
            raise ValueError("density values must be positive")
        total = float(np.sum(0.5 * (d[1:] + d[:-1]) * np.diff(x)))
        d = d / total
        self._knots, self._values = x, d
        self._a, self._b = x[:-1], x[1:]
        self._slope = np.diff(d) / np.diff(x)
        self._icpt = d[:-1] - self._slope * x[:-1]
        self.breakpoints = tuple(x.tolist())

    def partial_moment(self, k, x):
        x = np.asarray(x, dtype=float)
        u = np.clip(x[..., None], self._a, self._b)
        a = self._a
        terms = (self._icpt * (u ** (k + 1) - a ** (k + 1)) / (k + 1)
                 + self._slope * (u ** (k + 2) - a ** (k + 2)) / (k + 2))
        return terms.sum(axis=-1)

    def density(self, x):
        return np.interp(x, self._knots, self._values)

    def to_dict(self):
        return {"kind": "piecewise_linear_density", "knots": self._knots.tolist(),
                "values": self._values.tolist()}


class BetaMixturePrior(ContinuousPrior):
    """Finite mixture of Beta(alpha, beta) densities.

    Partial moments use the regularized incomplete beta function:
    ``integral_0^x w**k Beta(w; a, b) dw = B(a+k, b)/B(a, b) * I_x(a+k, b)``.
    """

    kind = "beta_mixture"

    def __init__(self, components: Sequence[Sequence[float]]):
        arr = np.asarray(components, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 3 or arr.shape[0] == 0:
            raise ValueError("components must be a list of [alpha, beta, weight] triples")
        al, be, w = arr.T
        if np.any(al <= 0) or np.any(be <= 0):
            raise ValueError("beta parameters must be positive")
        if np.any(w <= 0):
            raise ValueError("mixture weights must be positive")
        total = float(w.sum())
        if abs(total - 1.0) > 1e-10:
            raise ValueError(f"mixture weights sum to {total:.12g}, expected 1")
        self._al, self._be, self._w = al, be, w / total
        self._lnB = special.betaln(al, be)

    def partial_moment(self, k, x):
        x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
        scale = self._w * np.exp(special.betaln(self._al + k, self._be) - self._lnB)
        return np.sum(scale * special.betainc(self._al + k, self._be, x[..., None]), axis=-1)

    def density(self, x):
        x = np.asarray(x, dtype=float)[..., None]
        with np.errstate(divide="ignore"):
            logpdf = (special.xlogy(self._al - 1, x) + special.xlog1py(self._be - 1, -x) - self._lnB)
        return np.sum(self._w * np.exp(logpdf), axis=-1)

    def to_dict(self):
        return {"kind": "beta_mixture",
                "components": [[float(a), float(b), float(w)] for a, b, w in zip(self._al, self._be, self._w)]}

    def __repr__(self):
        return f"BetaMixturePrior({self.to_dict()['components']})"


Prior = Union[DiscretePrior, ContinuousPrior]


def prior_from_dict(d: dict) -> Prior:
    kind = d.get("kind")
    if kind == "discrete":
        return DiscretePrior(d["support"], d["probs"])
    if kind == "piecewise_uniform":
        return PiecewiseUniformPrior(d["pieces"])
    if kind == "piecewise_linear_density":
        return PiecewiseLinearDensityPrior(d["knots"], d["values"])
    if kind == "beta_mixture":
        return BetaMixturePrior(d["components"])
    if kind == "uniform":
        return PiecewiseUniformPrior([[0.0, 1.0, 1.0]])
    raise ValueError(f"unknown prior kind {kind!r}")


def uniform_prior() -> PiecewiseUniformPrior:
    return PiecewiseUniformPrior([[0.0, 1.0, 1.0]])


def conditional_mean(prior: Prior, a: float, b: float) -> float:
    """``E[w | w in [a, b]]``; raises ``EmptyInterval`` on zero mass."""
    if not 0.0 <= a <= b <= 1.0:
        raise ValueError(f"need 0 <= a <= b <= 1, got [{a}, {b}]")
    return prior.conditional_mean(a, b)


@dataclass(eq=False)
class PosteriorDistribution:
    """Distribution G of the posterior mean.

    Atoms sit at pooled means. For continuous priors, ``regions`` are the
    revealed intervals on which G coincides with the prior.
    """

    means: np.ndarray
    masses: np.ndarray
    regions: tuple[tuple[float, float], ...] = ()
    prior: ContinuousPrior | None = field(default=None, repr=False)

    def __post_init__(self):
        m = np.asarray(self.means, dtype=float).ravel()
        p = np.asarray(self.masses, dtype=float).ravel()
        keep = p > 0.0
        m, p = m[keep], p[keep]
        order = np.argsort(m, kind="stable")
        m, p = m[order], p[order]
        merged_m, merged_p = [], []
        for mi, pi in zip(m, p):
            if merged_m and mi - merged_m[-1] <= MERGE_TOL:
                tot = merged_p[-1] + pi
                merged_m[-1] = (merged_m[-1] * merged_p[-1] + mi * pi) / tot
                merged_p[-1] = tot
            else:
                merged_m.append(float(mi))
                merged_p.append(float(pi))
        self.means = np.array(merged_m)
        self.masses = np.array(merged_p)
        self.regions = tuple((float(a), float(b)) for a, b in self.regions if b > a)
        if self.regions and self.prior is None:
            raise ValueError("continuous regions need the prior they inherit from")

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return list(zip(self.means.tolist(), self.masses.tolist()))

    def total_mass(self) -> float:
        out = float(self.masses.sum())
        for a, b in self.regions:
            out += float(self.prior.mass(a, b))
        return out

    def mean(self) -> float:
        out = float(np.dot(self.means, self.masses))
        for a, b in self.regions:
            out += float(self.prior.partial_mean(b) - self.prior.partial_mean(a))
        return out

    def value(self, V: ObjectiveFn) -> float:
        """``integral V dG``."""
        out = float(np.dot(self.masses, V(self.means))) if self.means.size else 0.0
        for a, b in self.regions:
            out += float(self.prior.expect_poly(V.coeffs, a, b))
        return out

    def shortfall(self, x):
        """``integral_0^x G(t) dt = E_G[(x - m)^+]``."""
        x = np.asarray(x, dtype=float)
        out = np.sum(self.masses * np.maximum(x[..., None] - self.means, 0.0), axis=-1)
        for a, b in self.regions:
            u = np.clip(x, a, b)
            pr = self.prior
            out = out + x * (pr.cdf(u) - pr.cdf(a)) - (pr.partial_mean(u) - pr.partial_mean(a))
        return out

    def to_dict(self) -> dict:
        return {"atoms": [[m, p] for m, p in self.atoms],
                "regions": [[a, b] for a, b in self.regions]}


def induce_distribution(prior: Prior, signal) -> PosteriorDistribution:
    """Distribution of the posterior mean that ``signal`` induces under ``prior``."""
    if isinstance(prior, DiscretePrior):
        if isinstance(signal, (MonotonePartition, SetPartition)):
            signal.validate(prior.n)
            blocks = partition_blocks(signal)
            return PosteriorDistribution([prior.block_mean(b) for b in blocks],
                                         [prior.block_mass(b) for b in blocks])
        if isinstance(signal, StochasticUpperCensorship):
            return _induce_stochastic_uc(prior, signal)
    elif isinstance(signal, PoolingSet):
        signal.validate()
        means, masses, regions, prev = [], [], [], 0.0
        for a, b in signal.intervals:
            means.append(prior.conditional_mean(a, b))
            masses.append(float(prior.mass(a, b)))
            regions.append((prev, a))
            prev = b
        regions.append((prev, 1.0))
        return PosteriorDistribution(means, masses, tuple(regions), prior)
    if hasattr(signal, "induce"):
        return signal.induce(prior)
    raise MalformedSignal(f"{type(signal).__name__} is not a signal for a {prior.kind} prior")


def _induce_stochastic_uc(prior: DiscretePrior, s: StochasticUpperCensorship) -> PosteriorDistribution:
    k, q = s.cutoff_index, s.q
    if not 0 <= k < prior.n or not 0.0 <= q <= 1.0:
        raise MalformedSignal(f"stochastic upper censorship ({k}, {q}) invalid for n={prior.n}")
    w, f = prior.support, prior.probs
    pooled_mass = (1.0 - q) * f[k] + f[k + 1:].sum()
    means = list(w[:k]) + [w[k]]
    masses = list(f[:k]) + [q * f[k]]
    if pooled_mass > 0.0:
        pooled = ((1.0 - q) * f[k] * w[k] + np.dot(f[k + 1:], w[k + 1:])) / pooled_mass
        means.append(pooled)
        masses.append(pooled_mass)
    return PosteriorDistribution(means, masses)


@dataclass(frozen=True)
class ContractionReport:
    passed: bool
    mean_gap: float
    worst_violation: float
    worst_at: float

    def __bool__(self):
        return self.passed


def verify_contraction(g: PosteriorDistribution, prior: Prior, grid: int = 1000,
                       tol: float = 1e-9) -> ContractionReport:
    """Check that ``prior`` is a mean-preserving spread of ``g``.

    Requires equal means and ``integral_0^x G <= integral_0^x F`` on a uniform
    grid of [0, 1], both up to ``tol``. A failure is reported, not raised.
    """
    if grid < 100:
        raise ValueError("grid must be at least 100")
    x = np.linspace(0.0, 1.0, grid)
    excess = np.asarray(g.shortfall(x)) - np.asarray(prior.shortfall(x))
    i = int(np.argmax(excess))
    gap = abs(g.mean() - prior.mean)
    worst = float(excess[i])
    return ContractionReport(bool(gap <= tol and worst <= tol), float(gap), worst, float(x[i]))
