"""Media censorship as monotone persuasion.

Each outlet ``c`` endorses the government iff its quality ``theta >= c``.
With finitely many outlets the messages cut [0, 1] into cells, and citizens
learn which cell ``theta`` is in. Censoring an outlet merges the two cells
it separates, so policies correspond one to one with consecutive-block
partitions of the cell means. With a continuum of outlets, the permitted
set plays the role of the revealed region of a pooling set.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .continuous import solve_monotone_continuous, unrestricted_value
from .discrete import partition_value, solve_monotone_discrete
from .errors import ConfigInvalid, NonmonotoneSignal
from .objective import ObjectiveFn, classify_shape
from .oracle import enumerate_partitions
from .priors import ContinuousPrior, DiscretePrior, PosteriorDistribution, induce_distribution, prior_from_dict
from .signals import MonotonePartition, SetPartition

CONTINUUM = "continuum"
MAX_OUTLETS_CHECK = 12


@dataclass(frozen=True)
class MediaEnvironment:
    quality: ContinuousPrior
    citizens: ObjectiveFn
    outlets: tuple[float, ...] | str

    def __post_init__(self):
        if not isinstance(self.quality, ContinuousPrior):
            raise ConfigInvalid("quality: must be a continuous prior", module="censorship")
        if isinstance(self.outlets, str) and self.outlets != CONTINUUM:
            raise ConfigInvalid(f"outlets: expected a list or {CONTINUUM!r}, got {self.outlets!r}",
                                module="censorship")
        if self.outlets != CONTINUUM:
            c = tuple(float(x) for x in self.outlets)
            if any(not 0.0 < x < 1.0 for x in c):
                raise ConfigInvalid(f"outlets: {c} must lie strictly inside (0, 1)", module="censorship")
            if any(b <= a for a, b in zip(c, c[1:])):
                raise ConfigInvalid(f"outlets: {c} must be strictly increasing", module="censorship")
            object.__setattr__(self, "outlets", c)
        grid = np.linspace(0.0, 1.0, 1001)
        slope = self.citizens.deriv1(grid)
        if slope.min() < -1e-9:
            at = grid[int(np.argmin(slope))]
            raise ConfigInvalid(f"citizens: not a CDF, slope {slope.min():.3g} < 0 at m={at:.4g}",
                                module="censorship")

    @property
    def is_continuum(self) -> bool:
        return self.outlets == CONTINUUM

    @property
    def n_outlets(self) -> int:
        if self.is_continuum:
            raise ValueError("a continuum of outlets has no count")
        return len(self.outlets)

    @classmethod
    def from_dict(cls, d: dict) -> "MediaEnvironment":
        outlets = d["outlets"]
        if outlets != CONTINUUM and not isinstance(outlets, (list, tuple)):
            raise ConfigInvalid(f"outlets: expected a list or {CONTINUUM!r}", module="censorship")
        return cls(prior_from_dict(d["quality"]), ObjectiveFn.from_dict(d["citizens"]), outlets)


@dataclass(frozen=True)
class CensorshipPolicy:
    """Censored outlets, by position."""

    censored: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "censored", tuple(sorted(float(c) for c in self.censored)))

    def validate(self, env: MediaEnvironment) -> None:
        extra = set(self.censored) - set(env.outlets)
        if extra:
            raise ConfigInvalid(f"censored: {sorted(extra)} are not outlets", module="censorship")

    def permitted(self, env: MediaEnvironment) -> tuple[float, ...]:
        return tuple(c for c in env.outlets if c not in self.censored)

    @classmethod
    def from_mask(cls, env: MediaEnvironment, mask: int) -> "CensorshipPolicy":
        """Bit ``k`` of ``mask`` censors the ``k``-th outlet."""
        return cls(tuple(c for k, c in enumerate(env.outlets) if mask >> k & 1))

    def mask(self, env: MediaEnvironment) -> int:
        return sum(1 << k for k, c in enumerate(env.outlets) if c in self.censored)


def _cells(edges, T: ContinuousPrior) -> tuple[list[float], list[float]]:
    bounds = [0.0, *edges, 1.0]
    mass = [float(T.mass(a, b)) for a, b in zip(bounds, bounds[1:])]
    means = [T.conditional_mean(a, b) for a, b in zip(bounds, bounds[1:])]
    return means, mass


def induced_state_prior(env: MediaEnvironment) -> DiscretePrior:
    """Cell means as states, cell masses as probabilities."""
    if env.is_continuum:
        raise ValueError("the induced state prior needs finitely many outlets")
    means, mass = _cells(env.outlets, env.quality)
    total = sum(mass)
    return DiscretePrior(means, [m / total for m in mass])


def policy_to_partition(env: MediaEnvironment, policy: CensorshipPolicy) -> MonotonePartition:
    policy.validate(env)
    n = env.n_outlets + 1
    return MonotonePartition.from_cuts(n, (k for k, c in enumerate(env.outlets) if c not in policy.censored))


def partition_to_policy(env: MediaEnvironment, p: MonotonePartition | SetPartition) -> CensorshipPolicy:
    """Censor every outlet that falls inside a block."""
    n = env.n_outlets + 1
    if isinstance(p, SetPartition):
        p.validate(n)
        if not p.is_monotone:
            raise NonmonotoneSignal(f"blocks {p.blocks} pool non-adjacent cells; no policy implements them")
        p = p.to_monotone()
    p.validate(n)
    open_cuts = set(p.cuts)
    return CensorshipPolicy(tuple(c for k, c in enumerate(env.outlets) if k not in open_cuts))


def policy_distribution(env: MediaEnvironment, policy: CensorshipPolicy) -> PosteriorDistribution:
    """Posterior-mean distribution of a policy, computed from the quality prior directly."""
    policy.validate(env)
    means, mass = _cells(policy.permitted(env), env.quality)
    return PosteriorDistribution(means, mass)


def policy_value(env: MediaEnvironment, policy: CensorshipPolicy) -> float:
    return policy_distribution(env, policy).value(env.citizens)


@dataclass
class EquivalenceReport:
    passed: bool
    n_policies: int
    n_partitions: int
    max_atom_gap: float
    roundtrip_ok: bool
    sets_equal: bool


def _atom_gap(a: PosteriorDistribution, b: PosteriorDistribution) -> float:
    if a.means.size != b.means.size:
        return float("inf")
    return float(max(np.abs(a.means - b.means).max(), np.abs(a.masses - b.masses).max()))


def verify_outcome_equivalence(env: MediaEnvironment, tol: float = 1e-12) -> EquivalenceReport:
    """Exhaustively check that policies and monotone partitions induce the same distributions."""
    k = env.n_outlets
    if k > MAX_OUTLETS_CHECK:
        raise ValueError(f"at most {MAX_OUTLETS_CHECK} outlets can be checked, got {k}")
    prior = induced_state_prior(env)
    worst, roundtrip = 0.0, True
    by_policy = {}
    for mask in range(1 << k):
        pol = CensorshipPolicy.from_mask(env, mask)
        part = policy_to_partition(env, pol)
        roundtrip &= partition_to_policy(env, part) == pol
        g = policy_distribution(env, pol)
        worst = max(worst, _atom_gap(g, induce_distribution(prior, part)))
        by_policy[part] = g
    parts = list(enumerate_partitions(k + 1, "monotone"))
    matched = 0
    for p in parts:
        roundtrip &= policy_to_partition(env, partition_to_policy(env, p)) == p
        g = by_policy.get(p)
        if g is not None and _atom_gap(g, induce_distribution(prior, p)) <= tol:
            matched += 1
    sets_equal = matched == len(parts) == len(by_policy)
    return EquivalenceReport(bool(sets_equal and roundtrip and worst <= tol), 1 << k, len(parts),
                             worst, bool(roundtrip), sets_equal)


@dataclass
class CensorshipResult:
    """Optimal censorship. ``censored``/``permitted`` list outlet positions for
    finitely many outlets; with a continuum, ``permitted`` is ``[]``, ``[c]``
    or an interval ``[lo, hi]`` (see ``permitted_kind``) and ``censored`` is its complement."""

    value: float
    unrestricted_value: float
    censored: list
    permitted: list
    permitted_kind: str
    ties: list = field(default_factory=list)
    benchmark: str = ""

    def to_dict(self) -> dict:
        return {"value": self.value, "unrestricted_value": self.unrestricted_value,
                "censored": self.censored, "permitted": self.permitted,
                "permitted_kind": self.permitted_kind, "ties": self.ties, "benchmark": self.benchmark}


def optimal_censorship(env: MediaEnvironment) -> CensorshipResult:
    """Optimal censorship policy via the monotone solvers.

    Finitely many outlets: the discrete solver on the induced states; the
    result censors every outlet above a threshold. Continuum: the continuous
    solver on the quality prior; no disclosure censors all outlets, a cutoff
    rule permits one outlet and interval disclosure permits an interval.
    """
    V = env.citizens
    shape = classify_shape(V)
    if env.is_continuum:
        sol = solve_monotone_continuous(env.quality, V, shape)
        unres = unrestricted_value(env.quality, V, shape)
        bench = ("bipooling (not a censorship policy)" if unres.certificate.holds
                 else "monotone optimum is unrestricted-optimal")
        if sol.branch == "none":
            return CensorshipResult(sol.value, unres.value, [[0.0, 1.0]], [], "none", benchmark=bench)
        if sol.branch == "cutoff":
            ties = [[a["omega_L_star"]] for a in sol.alternatives if abs(a["value"] - sol.value) <= 1e-12]
            c = sol.omega_L_star
            return CensorshipResult(sol.value, unres.value, [[0.0, c], [c, 1.0]], [c], "single",
                                    ties, bench)
        lo, hi = sol.omega_L_star, sol.omega_R_star
        return CensorshipResult(sol.value, unres.value, [[0.0, lo], [hi, 1.0]], [lo, hi], "interval",
                                benchmark=bench)

    prior = induced_state_prior(env)
    sol = solve_monotone_discrete(prior, V, shape)
    policies = [partition_to_policy(env, p) for p in sol.best_partitions]
    best = policies[0]
    unres = sol.stochastic.value if sol.stochastic is not None else sol.value
    bench = "stochastic upper censorship (not a censorship policy)" if sol.stochastic else ""
    return CensorshipResult(partition_value(prior, V, sol.canonical), float(unres),
                            list(best.censored), list(best.permitted(env)), "outlets",
                            [list(p.censored) for p in policies[1:]], bench)
