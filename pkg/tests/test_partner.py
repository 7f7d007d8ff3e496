import itertools
import logging

import numpy as np
import pytest

from adex.partner import (FEATURES, LEVELS, TAE_VALUES, DbnParameters,
                          FeedbackObservation, PartnerModelError,
                          TypingBaseline, compute_tae, expectation,
                          feature_marginal, init_partner_state, observe)

JOINT_STATES = list(itertools.product(range(3), repeat=4))  # (E, L, A, C)


# -- independent oracle --------------------------------------------------------

def random_params(rng: np.random.Generator) -> DbnParameters:
    def dist(n=3):
        d = rng.random(n) + 0.05
        return d / d.sum()

    params = DbnParameters()
    params.initial = {f: dist() for f in FEATURES}
    params.transitions = {f: np.stack([dist() for _ in range(3)]) for f in FEATURES}
    params.pos_given_e_a = rng.random((3, 3)) * 0.9 + 0.05
    params.neg_given_a = rng.random(3) * 0.9 + 0.05
    params.sub_given_c_a = rng.random((3, 3)) * 0.9 + 0.05
    params.tae_given_l_e = np.stack(
        [np.stack([dist() for _ in range(3)]) for _ in range(3)])
    return params.validate()


def random_observation(rng: np.random.Generator) -> FeedbackObservation:
    roll = rng.integers(0, 3)
    pos, neg = roll == 0, roll == 1
    return FeedbackObservation(pos=bool(pos), neg=bool(neg),
                               sub=bool(rng.integers(0, 2)),
                               tae=TAE_VALUES[rng.integers(0, 3)])


def state_likelihood(obs: FeedbackObservation, params: DbnParameters,
                     state: tuple[int, int, int, int]) -> float:
    """P(obs | E,L,A,C) for one concrete assignment, by direct lookup."""
    e, l, a, c = state
    p_pos = params.pos_given_e_a[e, a]
    p_neg = params.neg_given_a[a]
    p_sub = params.sub_given_c_a[c, a]
    like = (p_pos if obs.pos else 1 - p_pos)
    like *= (p_neg if obs.neg else 1 - p_neg)
    like *= (p_sub if obs.sub else 1 - p_sub)
    like *= params.tae_given_l_e[l, e, TAE_VALUES.index(obs.tae)]
    return float(like)


def brute_force_posterior(params: DbnParameters,
                          observations: list[FeedbackObservation]) -> np.ndarray:
    """Filtering by explicit summation over every joint latent trajectory.

    Builds the full trajectory tensor over the 81^T assignments and
    marginalizes; independent of the filter's factored prediction step.
    """
    n = len(JOINT_STATES)
    init = np.array([np.prod([params.initial[f][s[i]]
                              for i, f in enumerate(FEATURES)])
                     for s in JOINT_STATES])
    trans = np.empty((n, n))
    for i, prev in enumerate(JOINT_STATES):
        for j, cur in enumerate(JOINT_STATES):
            trans[i, j] = np.prod([params.transitions[f][prev[k], cur[k]]
                                   for k, f in enumerate(FEATURES)])
    likes = [np.array([state_likelihood(o, params, s) for s in JOINT_STATES])
             for o in observations]
    T = len(observations)
    tensor = np.ones((n,) * T)
    shape = [1] * T
    shape[0] = n
    tensor *= (init * likes[0]).reshape(shape)
    for t in range(1, T):
        shape_t = [1] * T
        shape_t[t - 1], shape_t[t] = n, n
        tensor *= trans.reshape(shape_t)
        shape_t = [1] * T
        shape_t[t] = n
        tensor *= likes[t].reshape(shape_t)
    marginal = tensor.sum(axis=tuple(range(T - 1)))
    marginal = marginal / marginal.sum()
    return marginal.reshape((3, 3, 3, 3))  # ordering matches JOINT_STATES


def test_filter_matches_trajectory_enumeration():
    rng = np.random.default_rng(42)
    for trial in range(6):
        params = random_params(rng)
        observations = [random_observation(rng) for _ in range(3)]
        state = init_partner_state(params)
        for t, obs in enumerate(observations, start=1):
            state = observe(state, obs, params)
            expected = brute_force_posterior(params, observations[:t])
            np.testing.assert_allclose(state.posterior, expected, atol=1e-9)


# -- initialization -------------------------------------------------------------

def test_init_uniform_product():
    params = DbnParameters()
    params.initial = {f: np.full(3, 1 / 3) for f in FEATURES}
    state = init_partner_state(params)
    np.testing.assert_allclose(state.posterior, np.full((3, 3, 3, 3), 1 / 81))
    assert state.turn_index == 0


def test_init_marginal_identity():
    params = DbnParameters()
    params.initial["expertise"] = np.array([0.2, 0.5, 0.3])
    state = init_partner_state(params)
    np.testing.assert_allclose(feature_marginal(state, "expertise"),
                               [0.2, 0.5, 0.3])


def test_init_rejects_bad_marginal():
    params = DbnParameters()
    params.initial["load"] = np.array([0.3, 0.3, 0.3])
    with pytest.raises(PartnerModelError):
        init_partner_state(params)


# -- observe properties ----------------------------------------------------------

def test_flat_likelihood_returns_predicted_prior():
    params = DbnParameters()
    params.pos_given_e_a = np.full((3, 3), 0.4)
    params.neg_given_a = np.full(3, 0.2)
    params.sub_given_c_a = np.full((3, 3), 0.3)
    params.tae_given_l_e = np.full((3, 3, 3), 1 / 3)
    params.validate()
    state = observe(init_partner_state(params), FeedbackObservation(), params)
    stepped = observe(state, FeedbackObservation(pos=True), params)
    predicted = np.zeros((3, 3, 3, 3))
    for s, p in np.ndenumerate(state.posterior):
        for s2 in JOINT_STATES:
            predicted[s2] += p * np.prod([params.transitions[f][s[k], s2[k]]
                                          for k, f in enumerate(FEATURES)])
    np.testing.assert_allclose(stepped.posterior, predicted, atol=1e-12)


def test_positive_streak_raises_expertise():
    params = DbnParameters()
    state = init_partner_state(params)
    initial = expectation(state, "expertise")
    for _ in range(30):
        state = observe(state, FeedbackObservation(pos=True), params)
    assert expectation(state, "expertise") > initial


def test_symmetric_sticky_keeps_uniform():
    params = DbnParameters()
    sym = np.array([[0.9, 0.05, 0.05], [0.05, 0.9, 0.05], [0.05, 0.05, 0.9]])
    params.initial = {f: np.full(3, 1 / 3) for f in FEATURES}
    params.transitions = {f: sym.copy() for f in FEATURES}
    params.pos_given_e_a = np.full((3, 3), 0.5)
    params.neg_given_a = np.full(3, 0.5)
    params.sub_given_c_a = np.full((3, 3), 0.5)
    params.tae_given_l_e = np.full((3, 3, 3), 1 / 3)
    params.validate()
    state = init_partner_state(params)
    for _ in range(5):
        state = observe(state, FeedbackObservation(sub=True, tae="higher"), params)
        np.testing.assert_allclose(state.posterior, np.full((3, 3, 3, 3), 1 / 81),
                                   atol=1e-12)


def test_value_relabeling_mirrors_expectation():
    # reversing a feature's levels everywhere maps E[x] to 1 - E[x]
    rng = np.random.default_rng(7)
    params = random_params(rng)
    mirrored = random_params(rng)  # fresh object, then overwrite
    mirrored.initial = {f: params.initial[f].copy() for f in FEATURES}
    mirrored.transitions = {f: params.transitions[f].copy() for f in FEATURES}
    mirrored.pos_given_e_a = params.pos_given_e_a.copy()
    mirrored.neg_given_a = params.neg_given_a.copy()
    mirrored.sub_given_c_a = params.sub_given_c_a.copy()
    mirrored.tae_given_l_e = params.tae_given_l_e.copy()
    # mirror the expertise axis
    mirrored.initial["expertise"] = params.initial["expertise"][::-1].copy()
    mirrored.transitions["expertise"] = params.transitions["expertise"][::-1, ::-1].copy()
    mirrored.pos_given_e_a = params.pos_given_e_a[::-1, :].copy()
    mirrored.tae_given_l_e = params.tae_given_l_e[:, ::-1, :].copy()
    mirrored.validate()
    obs = [random_observation(np.random.default_rng(3)) for _ in range(4)]
    a, b = init_partner_state(params), init_partner_state(mirrored)
    for o in obs:
        a, b = observe(a, o, params), observe(b, o, mirrored)
        assert expectation(a, "expertise") == pytest.approx(
            1.0 - expectation(b, "expertise"), abs=1e-12)


def test_zero_likelihood_keeps_predicted_prior(caplog):
    params = DbnParameters()
    params.pos_given_e_a = np.zeros((3, 3))
    params.validate()
    state = init_partner_state(params)
    with caplog.at_level(logging.WARNING):
        stepped = observe(state, FeedbackObservation(pos=True), params)
    assert "zero likelihood" in caplog.text
    assert stepped.posterior.sum() == pytest.approx(1.0)


def test_normalization_invariant():
    rng = np.random.default_rng(11)
    params = random_params(rng)
    state = init_partner_state(params)
    for _ in range(50):
        state = observe(state, random_observation(rng), params)
        assert abs(state.posterior.sum() - 1.0) < 1e-9


def test_turn_horizon_enforced():
    params = DbnParameters()
    state = init_partner_state(params)
    object.__setattr__(state, "turn_index", 1000)
    with pytest.raises(PartnerModelError, match="horizon"):
        observe(state, FeedbackObservation(), params)


def test_default_positive_likelihood_monotone_in_expertise():
    params = DbnParameters()
    for a in range(3):
        assert params.pos_given_e_a[2, a] > params.pos_given_e_a[0, a]


def test_pos_and_neg_exclusive():
    with pytest.raises(PartnerModelError):
        FeedbackObservation(pos=True, neg=True)


# -- expectation -----------------------------------------------------------------

def test_expectation_uniform():
    state = init_partner_state(DbnParameters())
    assert expectation(state, "load") == pytest.approx(0.5)


def test_expectation_point_mass():
    params = DbnParameters()
    params.initial["attentiveness"] = np.array([0.0, 0.0, 1.0])
    state = init_partner_state(params)
    assert expectation(state, "attentiveness") == pytest.approx(1.0)


def test_expectation_dot_product():
    params = DbnParameters()
    params.initial["cooperativeness"] = np.array([0.2, 0.5, 0.3])
    state = init_partner_state(params)
    assert expectation(state, "cooperativeness") == pytest.approx(0.55)


def test_expectation_unknown_feature():
    state = init_partner_state(DbnParameters())
    with pytest.raises(PartnerModelError):
        expectation(state, "charisma")


# -- typing observable -------------------------------------------------------------

def test_tae_higher():
    baseline = TypingBaseline(mean_time_per_char=1.0, mean_deletions=3, samples=4)
    assert compute_tae(1.2, 5, baseline) == "higher"


def test_tae_lower():
    baseline = TypingBaseline(mean_time_per_char=1.0, mean_deletions=3, samples=4)
    assert compute_tae(0.8, 1, baseline) == "lower"


def test_tae_mixed_is_none():
    baseline = TypingBaseline(mean_time_per_char=1.0, mean_deletions=3, samples=4)
    assert compute_tae(1.2, 1, baseline) == "none"
    baseline = TypingBaseline(mean_time_per_char=1.0, mean_deletions=3, samples=4)
    assert compute_tae(0.8, 5, baseline) == "none"


def test_tae_single_strict_inequality_is_none():
    for t, d in ((1.5, 3.0), (1.0, 9.0), (0.5, 3.0), (1.0, 0.0)):
        baseline = TypingBaseline(mean_time_per_char=1.0, mean_deletions=3, samples=2)
        strict = (t > 1.0) + (d > 3.0) if (t > 1.0 or d > 3.0) else (t < 1.0) + (d < 3.0)
        if strict == 1:
            assert compute_tae(t, d, baseline) == "none"


def test_tae_updates_baseline():
    baseline = TypingBaseline(mean_time_per_char=1.0, mean_deletions=2, samples=1)
    compute_tae(2.0, 4, baseline)
    assert baseline.samples == 2
    assert baseline.mean_time_per_char == pytest.approx(1.5)
    assert baseline.mean_deletions == pytest.approx(3.0)


def test_tae_requires_samples():
    with pytest.raises(PartnerModelError):
        compute_tae(1.0, 1, TypingBaseline(samples=0))
