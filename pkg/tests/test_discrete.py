import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from monopersuasion.discrete import (tangency_residual, partition_value, solve_monotone_discrete,
                                     solve_stochastic_uc, uc_label, uc_walk, walk_curve)
from monopersuasion.errors import ShapeError
from monopersuasion.instances import random_discrete_prior, random_s_objective
from monopersuasion.objective import ObjectiveFn, tangent_gap
from monopersuasion.oracle import brute_force
from monopersuasion.priors import DiscretePrior, induce_distribution, verify_contraction
from monopersuasion.signals import MonotonePartition

from conftest import atoms_close

seeds = st.integers(0, 2 ** 32 - 1)


def test_two_state(two_state, smoothstep):
    s = solve_stochastic_uc(two_state, smoothstep)
    assert (s.cutoff_index, s.case) == (0, "interior")
    assert s.q == pytest.approx(2 / 3, abs=1e-9)
    assert s.pooled_mean == pytest.approx(0.75, abs=1e-9)
    assert s.value == pytest.approx(0.5625, abs=1e-9)
    assert abs(tangency_residual(smoothstep, s)) < 1e-9
    sol = solve_monotone_discrete(two_state, smoothstep)
    assert sol.value == pytest.approx(0.5, abs=1e-12)
    assert sol.uc_forms == ((0, 0), (0, 1))
    assert sol.canonical == MonotonePartition.no_disclosure(2)


def test_three_state(three_state, smoothstep):
    s = solve_stochastic_uc(three_state, smoothstep)
    assert (s.cutoff_index, s.cutoff_state) == (0, 0.0)
    assert s.q == pytest.approx(2 / 3, abs=1e-9)
    assert s.pooled_mean == pytest.approx(0.75, abs=1e-9)
    assert s.value == pytest.approx(0.703125, abs=1e-9)
    sol = solve_monotone_discrete(three_state, smoothstep)
    assert sol.best_partitions == (MonotonePartition(((0, 0), (1, 2))),)
    assert sol.uc_forms == ((0, 1),)
    assert sol.value == pytest.approx(25 / 36, abs=1e-12)


def test_knot_optimum(smoothstep):
    # the walk's gap turns negative exactly as it passes the support point 0.2
    prior = DiscretePrior([0.0, 0.2, 1.0], [0.25, 0.25, 0.5])
    s = solve_stochastic_uc(prior, smoothstep)
    assert (s.case, s.cutoff_index, s.q) == ("knot", 1, 0.0)
    assert s.pooled_mean == pytest.approx(11 / 15, abs=1e-12)
    assert s.value == pytest.approx(0.75 * 2783 / 3375, abs=1e-12)
    assert tangency_residual(smoothstep, s) >= 0.0
    walk = uc_walk(prior, smoothstep, np.array([0.2 - 1e-9, 0.2]))
    assert walk.delta[0] > 0.03 and walk.delta[1] < -0.09


def test_no_disclosure_case():
    # concave-looking on the support: pooling everything beats revealing the bottom
    V = ObjectiveFn.s_family(0.1)
    prior = DiscretePrior([0.3, 0.6, 0.9], [0.3, 0.3, 0.4])
    s = solve_stochastic_uc(prior, V)
    assert s.case == "no_disclosure" and s.cutoff_index == 0 and s.q == 0.0
    assert s.value == pytest.approx(float(V(prior.mean)), abs=1e-15)


def test_full_disclosure_case():
    V = ObjectiveFn.s_family(0.9)
    prior = DiscretePrior([0.0, 0.1, 0.2], [0.3, 0.3, 0.4])
    s = solve_stochastic_uc(prior, V)
    assert s.case == "full_disclosure" and s.cutoff_index == 2


def test_requires_s_shape(three_state):
    with pytest.raises(ShapeError) as exc:
        solve_stochastic_uc(three_state, ObjectiveFn.m_family(0.3, 0.7))
    assert exc.value.code == "discrete_solver.ShapeError"


def test_convex_and_concave_shortcuts(three_state):
    convex = solve_monotone_discrete(three_state, ObjectiveFn.polynomial([0, 0, 1]))
    assert convex.canonical == MonotonePartition.full_disclosure(3)
    concave = solve_monotone_discrete(three_state, ObjectiveFn.polynomial([0, 0, -1]))
    assert concave.canonical == MonotonePartition.no_disclosure(3)
    affine = solve_monotone_discrete(three_state, ObjectiveFn.polynomial([0.1, 2.0]))
    assert len(affine.best_partitions) == 2
    assert affine.value == pytest.approx(0.1 + 2 * 0.625)


def test_uc_label():
    assert uc_label(0) == (0, 0)
    assert uc_label(3) == (2, 1)


def test_walk_matches_definition(three_state, smoothstep):
    # z = 0.25 is halfway along the first segment
    pt = uc_walk(three_state, smoothstep, 0.25)
    assert (pt.j, pt.q) == (0, 0.5)
    mass = 0.125 + 0.75
    m = (0.25 * 0.5 + 0.5 * 1.0) / mass
    assert pt.m == pytest.approx(m, abs=1e-15)
    assert pt.W == pytest.approx(mass * float(smoothstep(m)), abs=1e-15)
    assert pt.delta == pytest.approx(float(tangent_gap(smoothstep, 0.0, m)), abs=1e-15)
    with pytest.raises(ValueError):
        uc_walk(three_state, smoothstep, 1.5)


def test_walk_curve_single_point(three_state, smoothstep):
    pt, z = walk_curve(three_state, smoothstep, 1)
    assert z.tolist() == [0.0] and pt.m[0] == pytest.approx(0.625)


def test_walk_curve_endpoints(three_state, smoothstep):
    pt, z = walk_curve(three_state, smoothstep, 11)
    assert z[0] == 0.0 and z[-1] == 1.0
    assert pt.W[-1] == pytest.approx(partition_value(three_state, smoothstep,
                                                     MonotonePartition.full_disclosure(3)))


def test_partition_value_matches_distribution(three_state, smoothstep):
    p = MonotonePartition.from_cuts(3, [0])
    assert partition_value(three_state, smoothstep, p) == pytest.approx(
        induce_distribution(three_state, p).value(smoothstep), abs=1e-15)


def test_stochastic_distribution_contracts(three_state, smoothstep):
    s = solve_stochastic_uc(three_state, smoothstep)
    g = induce_distribution(three_state, s)
    assert atoms_close(g, [(0.0, 1 / 6), (0.75, 5 / 6)], 1e-9)
    assert verify_contraction(g, three_state).passed


@given(seeds, st.integers(2, 10))
@settings(max_examples=60, deadline=None)
def test_matches_brute_force(seed, n):
    rng = np.random.default_rng(seed)
    prior = random_discrete_prior(rng, n)
    V = random_s_objective(rng)
    sol = solve_monotone_discrete(prior, V)
    bf = brute_force(prior, V, "monotone")
    assert abs(sol.value - bf.value) <= 1e-9
    for p in bf.best:
        assert p in sol.best_partitions


@given(seeds, st.integers(2, 10))
@settings(max_examples=60, deadline=None)
def test_stochastic_optimum_conditions(seed, n):
    rng = np.random.default_rng(seed)
    prior = random_discrete_prior(rng, n)
    V = random_s_objective(rng, affine=False)
    s = solve_stochastic_uc(prior, V)
    r = tangency_residual(V, s)
    if s.case == "interior":
        assert abs(r) < 1e-8
    elif s.case in ("knot", "no_disclosure"):
        assert r >= -1e-12
    # stochastic value dominates every deterministic monotone signal
    assert s.value >= brute_force(prior, V).value - 1e-12
    assert verify_contraction(induce_distribution(prior, s), prior).passed


@given(seeds, st.integers(2, 10), st.floats(-5, 5), st.floats(-5, 5))
@settings(max_examples=40, deadline=None)
def test_affine_invariance(seed, n, a, b):
    rng = np.random.default_rng(seed)
    prior = random_discrete_prior(rng, n)
    V = random_s_objective(rng, affine=False)
    base = solve_monotone_discrete(prior, V)
    shifted = solve_monotone_discrete(prior, V.with_affine(a, b))
    assert shifted.best_partitions == base.best_partitions
    assert abs(shifted.value - base.value - (a * prior.mean + b)) < 1e-9
    s0 = solve_stochastic_uc(prior, V)
    s1 = solve_stochastic_uc(prior, V.with_affine(a, b))
    assert s1.cutoff_index == s0.cutoff_index and s1.q == s0.q

