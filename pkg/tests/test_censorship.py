import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from monopersuasion.censorship import (CensorshipPolicy, MediaEnvironment, induced_state_prior,
                                       optimal_censorship, partition_to_policy, policy_distribution,
                                       policy_to_partition, policy_value, verify_outcome_equivalence)
from monopersuasion.discrete import partition_value
from monopersuasion.errors import ConfigInvalid, NonmonotoneSignal
from monopersuasion.instances import random_beta_mixture, random_outlets, random_s_objective
from monopersuasion.objective import ObjectiveFn
from monopersuasion.priors import BetaMixturePrior, induce_distribution, uniform_prior, verify_contraction
from monopersuasion.signals import PoolingSet, SetPartition

from conftest import EVEN_AFFINE, atoms_close, even_quartic_fn, polarized_prior, smoothstep_fn


def quartic_cdf():
    # the even quartic tilted so it is nondecreasing on [0, 1]
    return even_quartic_fn(extra_a=EVEN_AFFINE)


@pytest.fixture
def two_outlets():
    return MediaEnvironment(uniform_prior(), smoothstep_fn(), (0.25, 0.75))


def test_induced_prior(two_outlets):
    p = induced_state_prior(two_outlets)
    assert np.allclose(p.support, [0.125, 0.5, 0.875], atol=1e-15)
    assert np.allclose(p.probs, [0.25, 0.5, 0.25], atol=1e-15)
    half = MediaEnvironment(uniform_prior(), smoothstep_fn(), (0.5,))
    assert np.allclose(induced_state_prior(half).support, [0.25, 0.75])


def test_four_policies_four_signals(two_outlets):
    expected = {
        (): ((0, 0), (1, 1), (2, 2)),
        (0.25,): ((0, 1), (2, 2)),
        (0.75,): ((0, 0), (1, 2)),
        (0.25, 0.75): ((0, 2),),
    }
    for censored, blocks in expected.items():
        pol = CensorshipPolicy(censored)
        part = policy_to_partition(two_outlets, pol)
        assert part.blocks == blocks
        assert partition_to_policy(two_outlets, part) == pol
    rep = verify_outcome_equivalence(two_outlets)
    assert rep.passed and rep.n_policies == rep.n_partitions == 4


def test_censor_top_outlet(two_outlets):
    g = policy_distribution(two_outlets, CensorshipPolicy((0.75,)))
    assert atoms_close(g, [(0.125, 0.25), (0.625, 0.75)], 1e-15)


def test_nonmonotone_partition_rejected(two_outlets):
    with pytest.raises(NonmonotoneSignal):
        partition_to_policy(two_outlets, SetPartition(((0, 2), (1,))))


def test_monotone_set_partition_accepted(two_outlets):
    pol = partition_to_policy(two_outlets, SetPartition(((0,), (1, 2))))
    assert pol.censored == (0.75,)


def test_policy_value_matches_partition(two_outlets):
    prior = induced_state_prior(two_outlets)
    for mask in range(4):
        pol = CensorshipPolicy.from_mask(two_outlets, mask)
        assert pol.mask(two_outlets) == mask
        assert policy_value(two_outlets, pol) == pytest.approx(
            partition_value(prior, two_outlets.citizens, policy_to_partition(two_outlets, pol)), abs=1e-15)


def test_no_outlets():
    env = MediaEnvironment(BetaMixturePrior([[2.0, 3.0, 1.0]]), smoothstep_fn(), ())
    assert atoms_close(policy_distribution(env, CensorshipPolicy(())), [(0.4, 1.0)], 1e-15)
    rep = verify_outcome_equivalence(env)
    assert rep.passed and rep.n_policies == 1


def test_beta_three_outlets():
    env = MediaEnvironment(BetaMixturePrior([[2, 5, 0.5], [5, 2, 0.5]]), smoothstep_fn(), (0.2, 0.5, 0.8))
    rep = verify_outcome_equivalence(env)
    assert rep.passed and rep.n_policies == 8 and rep.max_atom_gap <= 1e-12


@given(st.integers(0, 2 ** 32 - 1), st.integers(0, 4))
@settings(max_examples=30, deadline=None)
def test_random_equivalence(seed, k):
    rng = np.random.default_rng(seed)
    env = MediaEnvironment(random_beta_mixture(rng), smoothstep_fn(), random_outlets(rng, k))
    rep = verify_outcome_equivalence(env)
    assert rep.passed and rep.roundtrip_ok and rep.sets_equal


@pytest.mark.parametrize("outlets, field", [
    ((0.0, 0.5), "outlets"),
    ((0.6, 0.4), "outlets"),
    ("everywhere", "outlets"),
])
def test_environment_rejects(outlets, field):
    with pytest.raises(ConfigInvalid, match=field):
        MediaEnvironment(uniform_prior(), smoothstep_fn(), outlets)


def test_citizens_must_be_cdf():
    with pytest.raises(ConfigInvalid, match="citizens"):
        MediaEnvironment(uniform_prior(), even_quartic_fn(), "continuum")
    with pytest.raises(ConfigInvalid) as exc:
        MediaEnvironment(uniform_prior(), ObjectiveFn.polynomial([0, -1]), (0.5,))
    assert exc.value.code == "censorship.ConfigInvalid"


def test_unknown_censored_outlet(two_outlets):
    with pytest.raises(ConfigInvalid):
        policy_distribution(two_outlets, CensorshipPolicy((0.5,)))


# -- optimal policies ---------------------------------------------------------------------

def test_optimal_two_outlets(two_outlets):
    res = optimal_censorship(two_outlets)
    assert res.censored == [0.75] and res.permitted == [0.25]
    assert res.value == pytest.approx(0.5234375, abs=1e-15)
    # hand value: 0.25 V(0.125) + 0.75 V(0.625)
    V = smoothstep_fn()
    assert res.value == pytest.approx(0.25 * float(V(0.125)) + 0.75 * float(V(0.625)), abs=1e-15)
    assert res.unrestricted_value >= res.value


@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 6))
@settings(max_examples=30, deadline=None)
def test_optimal_policy_is_suffix(seed, k):
    rng = np.random.default_rng(seed)
    V = random_s_objective(rng, affine=False)
    # keep the objective nondecreasing so it is a CDF
    slope = V.deriv1(np.linspace(0, 1, 1001)).min()
    V = V.with_affine(max(0.0, -slope), 0.0)
    env = MediaEnvironment(random_beta_mixture(rng), V, random_outlets(rng, k))
    res = optimal_censorship(env)
    if res.censored:
        assert res.censored == list(env.outlets[-len(res.censored):])
    best = max(policy_value(env, CensorshipPolicy.from_mask(env, m)) for m in range(1 << k))
    assert abs(res.value - best) < 1e-12


def test_continuum_polarized_single_outlet():
    env = MediaEnvironment(polarized_prior(), quartic_cdf(), "continuum")
    res = optimal_censorship(env)
    assert res.permitted_kind == "single"
    assert res.permitted[0] == pytest.approx(0.0965043128558, abs=1e-9)
    assert res.ties[0][0] == pytest.approx(0.9034956871, abs=1e-9)
    assert res.value == pytest.approx(0.0119858503, abs=1e-9)
    # value shifts by the tilt times the mean
    assert res.value == pytest.approx(0.001152516967713831 + EVEN_AFFINE * 0.5, abs=1e-13)
    assert res.unrestricted_value == pytest.approx(0.0122416667, abs=1e-9)
    assert "bipooling" in res.benchmark


def test_continuum_uniform_interval():
    env = MediaEnvironment(uniform_prior(), quartic_cdf(), "continuum")
    res = optimal_censorship(env)
    assert res.permitted_kind == "interval"
    assert res.permitted == pytest.approx([0.46129565748, 0.53870434252], abs=1e-9)
    assert res.censored[0] == [0.0, res.permitted[0]]


def test_continuum_distribution_contracts():
    env = MediaEnvironment(polarized_prior(), quartic_cdf(), "continuum")
    res = optimal_censorship(env)
    c = res.permitted[0]
    g = induce_distribution(env.quality, PoolingSet(((0.0, c), (c, 1.0))))
    assert verify_contraction(g, env.quality).passed
    assert g.value(env.citizens) == pytest.approx(res.value, abs=1e-15)
