"""Continuous state, m-shaped objective: interval disclosure and bipooling.

The optimal monotone signal pools a left interval, reveals a middle interval
and pools a right interval. Three cases, tried in order:

1. interior interval disclosure, from the two decoupled tangency conditions
   at the cutoffs;
2. a cutoff rule, where the tangents at the two pooled means meet at the
   cutoff, provided it beats no disclosure;
3. no disclosure.

When the prior is spread out enough relative to the bitangent of ``V``, the
unrestricted optimum instead induces exactly the two tangency points
(bipooling), which no monotone signal can do.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import CertificateRequired, NoBitangent, ShapeError
from .numerics import BISECT_XTOL, bisect, find_roots
from .objective import (Bitangent, ObjectiveFn, ShapeReport, classify_shape, concavify_at,
                        solve_bitangent, tangent_gap)
from .priors import ContinuousPrior, PosteriorDistribution, induce_distribution
from .signals import PoolingSet

log = logging.getLogger(__name__)

SCAN_POINTS = 400
RESIDUAL_TOL = 1e-8
TIE_TOL = 1e-12


def _require_m_shaped(V: ObjectiveFn, shape: ShapeReport | None) -> ShapeReport:
    shape = shape or classify_shape(V)
    if shape.kind != "m_shaped":
        raise ShapeError(f"{V.description} is {shape.kind}; an m-shaped objective is required",
                         module="continuous_solver")
    return shape


# -- first-order conditions ---------------------------------------------------

def lower_tangency(prior: ContinuousPrior, V: ObjectiveFn, x: float) -> float:
    """Tangent at ``m = E[w | w <= x]`` minus ``V``, both at ``x``; zero at an optimal left cutoff."""
    return -tangent_gap(V, x, float(prior.lower_mean(x)))


def upper_tangency(prior: ContinuousPrior, V: ObjectiveFn, x: float) -> float:
    """Tangent at ``m = E[w | w >= x]`` minus ``V``, both at ``x``; zero at an optimal right cutoff."""
    return -tangent_gap(V, x, float(prior.upper_mean(x)))


def cutoff_tangency(prior: ContinuousPrior, V: ObjectiveFn, x: float) -> float:
    """Difference at ``x`` of the tangents drawn at the lower and upper pooled means."""
    return (tangent_gap(V, x, float(prior.upper_mean(x)))
            - tangent_gap(V, x, float(prior.lower_mean(x))))


def cutoff_value(prior: ContinuousPrior, V: ObjectiveFn, x):
    """Value of pooling ``[0, x)`` and ``(x, 1]`` separately; no disclosure at the endpoints."""
    x = np.asarray(x, dtype=float)
    F = prior.cdf(x)
    M = prior.partial_mean(x)
    E = prior.mean
    lo_ok, hi_ok = F > 0.0, F < 1.0
    low = np.where(lo_ok, F * V(M / np.where(lo_ok, F, 1.0)), 0.0)
    high = np.where(hi_ok, (1.0 - F) * V((E - M) / np.where(hi_ok, 1.0 - F, 1.0)), 0.0)
    return low + high


def interval_value(prior: ContinuousPrior, V: ObjectiveFn, lo: float, hi: float) -> float:
    return pooling_value(prior, V, PoolingSet.interval_disclosure(lo, hi))


def pooling_value(prior: ContinuousPrior, V: ObjectiveFn, p: PoolingSet) -> float:
    """Value of the monotone signal that pools each interval of ``p`` and reveals the rest."""
    return induce_distribution(prior, p).value(V)


# -- monotone solutions ----------------------------------------------------------

@dataclass
class IntervalDisclosure:
    """Pool ``[0, omega_L_star)`` and ``(omega_R_star, 1]``, reveal in between.

    ``branch`` is ``"interval"``, ``"cutoff"`` (``omega_L_star == omega_R_star``)
    or ``"none"``; the no-disclosure branch stores the cutoffs as 0 and 1 and
    pools everything.
    """

    omega_L_star: float
    omega_R_star: float
    m_L_star: float
    m_R_star: float
    value: float
    branch: str
    residuals: dict = field(default_factory=dict)
    alternatives: list = field(default_factory=list)
    diagnostics_ok: bool = True

    def pooling_set(self) -> PoolingSet:
        if self.branch == "none":
            return PoolingSet.no_disclosure()
        return PoolingSet.interval_disclosure(self.omega_L_star, self.omega_R_star)

    def distribution(self, prior: ContinuousPrior) -> PosteriorDistribution:
        return induce_distribution(prior, self.pooling_set())

    def to_dict(self) -> dict:
        return {"branch": self.branch, "omega_L_star": self.omega_L_star,
                "omega_R_star": self.omega_R_star, "m_L_star": self.m_L_star,
                "m_R_star": self.m_R_star, "value": self.value}


def _pick(cands: list[IntervalDisclosure]) -> IntervalDisclosure:
    # highest value; near-ties go to the leftmost cutoff
    top = max(c.value for c in cands)
    tied = [c for c in cands if c.value >= top - TIE_TOL]
    best = min(tied, key=lambda c: (c.omega_L_star, c.omega_R_star))
    best.alternatives = [c.to_dict() for c in cands if c is not best]
    return best


def _diagnostics(shape: ShapeReport, mL: float, mR: float) -> bool:
    return 0.0 < mL < shape.omega_L and shape.omega_R < mR < 1.0


def solve_interval_disclosure(prior: ContinuousPrior, V: ObjectiveFn,
                              shape: ShapeReport | None = None, grid: int = SCAN_POINTS,
                              xtol: float = BISECT_XTOL,
                              residual_tol: float = RESIDUAL_TOL) -> IntervalDisclosure | None:
    """Interior interval disclosure, or ``None`` if the tangency conditions have no admissible pair.

    Roots of the left and right tangency conditions are located separately by
    a sign scan over the convex region followed by bisection. Admissible
    pairs have ``lo < hi`` and residuals below ``residual_tol``; the best by value wins.
    A pair that collapses (``hi - lo <= 1e-10``) is returned as a cutoff rule.
    """
    shape = _require_m_shaped(V, shape)
    xs = np.linspace(shape.omega_L, shape.omega_R, grid)
    lows = find_roots(lambda x: lower_tangency(prior, V, x), xs, xtol)
    highs = find_roots(lambda x: upper_tangency(prior, V, x), xs, xtol)
    cands = []
    for a in lows:
        for b in highs:
            if b < a - 1e-10:
                continue
            r2, r3 = lower_tangency(prior, V, a), upper_tangency(prior, V, b)
            if abs(r2) >= residual_tol or abs(r3) >= residual_tol:
                continue
            if b - a <= 1e-10:
                c = 0.5 * (a + b)
                mL, mR = float(prior.lower_mean(c)), float(prior.upper_mean(c))
                cands.append(IntervalDisclosure(c, c, mL, mR, float(cutoff_value(prior, V, c)), "cutoff",
                                                {"cutoff": cutoff_tangency(prior, V, c)},
                                                diagnostics_ok=_diagnostics(shape, mL, mR)))
                continue
            mL, mR = float(prior.lower_mean(a)), float(prior.upper_mean(b))
            cands.append(IntervalDisclosure(a, b, mL, mR, interval_value(prior, V, a, b), "interval",
                                            {"lower": r2, "upper": r3},
                                            diagnostics_ok=_diagnostics(shape, mL, mR)))
    if not cands:
        return None
    if len(cands) > 1:
        log.info("interval disclosure: %d admissible cutoff pairs", len(cands))
    return _pick(cands)


def solve_cutoff_rule(prior: ContinuousPrior, V: ObjectiveFn, shape: ShapeReport | None = None,
                      grid: int = SCAN_POINTS, xtol: float = BISECT_XTOL) -> IntervalDisclosure | None:
    """Best cutoff rule satisfying the tangent-intersection condition, if it beats no disclosure.

    Every root bracketed on an interior ``grid``-point scan is refined and
    valued; the others are kept in ``alternatives``.
    """
    shape = _require_m_shaped(V, shape)
    xs = np.linspace(0.0, 1.0, grid + 2)[1:-1]
    roots = find_roots(lambda x: cutoff_tangency(prior, V, x), xs, xtol)
    if not roots:
        return None
    cands = []
    for x in roots:
        mL, mR = float(prior.lower_mean(x)), float(prior.upper_mean(x))
        cands.append(IntervalDisclosure(x, x, mL, mR, float(cutoff_value(prior, V, x)), "cutoff",
                                        {"cutoff": cutoff_tangency(prior, V, x)},
                                        diagnostics_ok=_diagnostics(shape, mL, mR)))
    best = _pick(cands)
    if best.value > float(V(prior.mean)):
        return best
    return None


def no_disclosure(prior: ContinuousPrior, V: ObjectiveFn) -> IntervalDisclosure:
    E = prior.mean
    return IntervalDisclosure(0.0, 1.0, E, E, float(V(E)), "none")


def solve_monotone_continuous(prior: ContinuousPrior, V: ObjectiveFn,
                              shape: ShapeReport | None = None, grid: int = SCAN_POINTS,
                              xtol: float = BISECT_XTOL,
                              residual_tol: float = RESIDUAL_TOL) -> IntervalDisclosure:
    """Optimal monotone signal: interval disclosure, else a cutoff rule, else no disclosure."""
    shape = _require_m_shaped(V, shape)
    sol = solve_interval_disclosure(prior, V, shape, grid, xtol, residual_tol)
    if sol is not None:
        return sol
    sol = solve_cutoff_rule(prior, V, shape, grid, xtol)
    if sol is not None:
        return sol
    return no_disclosure(prior, V)


# -- bipooling ---------------------------------------------------------------------

@dataclass
class BipoolingCertificate:
    m_L: float
    m_R: float
    omega_2star: float
    excess: float
    holds: bool
    reason: str = ""
    bitangent: Bitangent | None = None

    def to_dict(self) -> dict:
        return {"holds": self.holds, "m_L": self.m_L, "m_R": self.m_R,
                "omega_2star": self.omega_2star, "excess": self.excess, "reason": self.reason}


def check_bipooling_condition(prior: ContinuousPrior, V: ObjectiveFn,
                              shape: ShapeReport | None = None) -> BipoolingCertificate:
    """Whether every optimal unrestricted signal is nonmonotone bipooling.

    Needs a bitangent with ``0 < m_L < E[w] < m_R < 1`` and a cutoff ``w**``
    with ``E[w | w <= w**] = m_L`` whose upper conditional mean exceeds ``m_R``.
    """
    shape = _require_m_shaped(V, shape)
    nan = float("nan")
    try:
        bt = solve_bitangent(V, shape)
    except NoBitangent as exc:
        return BipoolingCertificate(nan, nan, nan, nan, False, f"no bitangent: {exc}")
    E = prior.mean
    if not 0.0 < bt.m_L < E < bt.m_R < 1.0:
        return BipoolingCertificate(bt.m_L, bt.m_R, nan, nan, False,
                                    "prior mean is not between the tangency points", bt)
    w2 = bisect(lambda x: float(prior.lower_mean(x)) - bt.m_L, 1e-12, 1.0)
    excess = float(prior.upper_mean(w2)) - bt.m_R
    holds = bt.m_L < w2 < 1.0 and excess > 0.0
    reason = "" if holds else "upper conditional mean at the pinned cutoff does not exceed m_R"
    return BipoolingCertificate(bt.m_L, bt.m_R, w2, excess, holds, reason, bt)


@dataclass
class BipoolingSignal:
    """Signal inducing exactly the two posterior means ``m_L`` and ``m_R``.

    ``deterministic_nonmonotone``: states in ``(omega_L2, omega_R2)`` pool to
    ``m_L``, the rest to ``m_R``. ``stochastic_monotone``: states below
    ``omega_2star`` go to ``m_L`` with probability ``q2`` and to ``m_R``
    otherwise; states above always go to ``m_R``.
    """

    mode: str
    m_L: float
    m_R: float
    mass_L: float
    value: float
    omega_L2: float = float("nan")
    omega_R2: float = float("nan")
    omega_2star: float = float("nan")
    q2: float = float("nan")

    def induce(self, prior: ContinuousPrior) -> PosteriorDistribution:
        E = prior.mean
        if self.mode == "deterministic_nonmonotone":
            lo, hi = self.omega_L2, self.omega_R2
            mid_mass = float(prior.mass(lo, hi))
            mid_sum = float(prior.partial_mean(hi) - prior.partial_mean(lo))
            return PosteriorDistribution([mid_sum / mid_mass, (E - mid_sum) / (1.0 - mid_mass)],
                                         [mid_mass, 1.0 - mid_mass])
        F2 = float(prior.cdf(self.omega_2star))
        M2 = float(prior.partial_mean(self.omega_2star))
        low_mass = self.q2 * F2
        return PosteriorDistribution([M2 / F2, (E - self.q2 * M2) / (1.0 - low_mass)],
                                     [low_mass, 1.0 - low_mass])

    def realization_lottery(self, state: float) -> list[tuple[float, float]]:
        """Distribution over posterior means that ``state`` draws, as ``(mean, prob)`` pairs."""
        if self.mode == "deterministic_nonmonotone":
            inside = self.omega_L2 < state < self.omega_R2
            return [(self.m_L, 1.0)] if inside else [(self.m_R, 1.0)]
        if state < self.omega_2star:
            return [(self.m_L, self.q2), (self.m_R, 1.0 - self.q2)]
        return [(self.m_R, 1.0)]

    def to_dict(self) -> dict:
        d = {"mode": self.mode, "m_L": self.m_L, "m_R": self.m_R, "mass_L": self.mass_L,
             "value": self.value}
        if self.mode == "deterministic_nonmonotone":
            d.update(omega_L2=self.omega_L2, omega_R2=self.omega_R2)
        else:
            d.update(omega_2star=self.omega_2star, q2=self.q2)
        return d


def construct_bipooling(prior: ContinuousPrior, V: ObjectiveFn, cert: BipoolingCertificate,
                        mode: str = "deterministic_nonmonotone") -> BipoolingSignal:
    """Build a bipooling signal placing mass ``p = (m_R - E)/(m_R - m_L)`` on ``m_L``.

    Deterministic mode: nested bisection, the outer one on the left end of
    the middle interval and the inner one placing its right end so the
    interval carries mass ``p``, until the interval's mean is ``m_L``.
    Stochastic mode: bisection on the mixing probability until the
    always-high realization has mean ``m_R``.
    """
    if not cert.holds:
        raise CertificateRequired(f"bipooling condition fails: {cert.reason}")
    E = prior.mean
    mL, mR = cert.m_L, cert.m_R
    p = (mR - E) / (mR - mL)
    value = float(concavify_at(V, cert.bitangent, E)) if cert.bitangent else float("nan")

    if mode in ("deterministic", "deterministic_nonmonotone"):
        def right_end(lo):
            return prior.quantile(float(prior.cdf(lo)) + p)

        def mid_mean_gap(lo):
            return prior.conditional_mean(lo, right_end(lo)) - mL

        lo = bisect(mid_mean_gap, 0.0, prior.quantile(1.0 - p))
        hi = right_end(lo)
        sig = BipoolingSignal("deterministic_nonmonotone", mL, mR, p, value, omega_L2=lo, omega_R2=hi)
    elif mode in ("stochastic", "stochastic_monotone"):
        w2 = cert.omega_2star
        F2 = float(prior.cdf(w2))
        M2 = float(prior.partial_mean(w2))

        def high_mean_gap(q):
            return (E - q * M2) / (1.0 - q * F2) - mR

        q2 = bisect(high_mean_gap, 0.0, 1.0)
        sig = BipoolingSignal("stochastic_monotone", mL, mR, q2 * F2, value, omega_2star=w2, q2=q2)
    else:
        raise ValueError(f"unknown bipooling mode {mode!r}")
    return sig


def nonmonotonicity_witness(sig: BipoolingSignal) -> bool:
    """The middle interval maps strictly below a set that surrounds it on both sides."""
    return (sig.mode == "deterministic_nonmonotone" and sig.m_L < sig.m_R
            and 0.0 < sig.omega_L2 < sig.omega_R2 < 1.0)


def fosd_witness(sig: BipoolingSignal, probes: int = 101) -> bool:
    """Higher states draw first-order-dominant lotteries over posterior means."""
    states = np.linspace(0.0, 1.0, probes)
    lotteries = [sig.realization_lottery(s) for s in states]
    points = sorted({m for lot in lotteries for m, _ in lot})

    def cdf(lot, t):
        return sum(pr for m, pr in lot if m <= t)

    for lo_lot, hi_lot in zip(lotteries[:-1], lotteries[1:]):
        if any(cdf(hi_lot, t) > cdf(lo_lot, t) + 1e-15 for t in points):
            return False
    return True


# -- unrestricted benchmark -----------------------------------------------------------

@dataclass
class UnrestrictedSolution:
    value: float
    description: str
    certificate: BipoolingCertificate
    monotone: IntervalDisclosure | None = None


def unrestricted_value(prior: ContinuousPrior, V: ObjectiveFn,
                       shape: ShapeReport | None = None) -> UnrestrictedSolution:
    """Unrestricted optimum: the concavification at the prior mean under the
    bipooling condition, otherwise the monotone optimum."""
    shape = _require_m_shaped(V, shape)
    cert = check_bipooling_condition(prior, V, shape)
    if cert.holds:
        val = float(concavify_at(V, cert.bitangent, prior.mean))
        return UnrestrictedSolution(val, f"bipooling on m_L={cert.m_L:.6g}, m_R={cert.m_R:.6g}", cert)
    mono = solve_monotone_continuous(prior, V, shape)
    return UnrestrictedSolution(mono.value, f"monotone ({mono.branch})", cert, mono)
