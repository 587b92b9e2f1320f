import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linbandits.core import (ActionVector, BipartiteMatching, EstimatorState, ExplicitArms,
                             SourceDestPaths)
from linbandits.environments import EnvironmentSpec, paper_instance
from linbandits.errors import ConfigurationError, ContractViolation, InitializationIncomplete
from linbandits.policies import (LLC, LLR, LLRK, NaiveState, NaiveUCB1, PolicyConfig,
                                 bonus_scale, initialization_schedule, llc_index, llr_index,
                                 make_policy, naive_update)
from linbandits.simulation import ExperimentPlan, arm_sequence, run_experiment

# 0.5 + sqrt(3 ln 100 / 10), evaluated once at 30 digits with mpmath
LLR_EXAMPLE = 1.67539400023839980906570920213


def state_of(theta, m, n):
    return EstimatorState(np.array(theta, dtype=float), np.array(m, dtype=np.int64), n)


# --- index formulas ---------------------------------------------------------

def test_llr_index_example():
    w = llr_index(state_of([0.5], [10], 100), 2)
    assert abs(w[0] - LLR_EXAMPLE) <= 1e-12


def test_llc_index_example_and_sign():
    w = llc_index(state_of([0.5], [10], 100), 2)
    assert abs(w[0] - (1.0 - LLR_EXAMPLE)) <= 1e-12
    assert w[0] < 0


def test_first_period_has_no_bonus():
    s = state_of([0.3, 0.8], [1, 5], 1)
    np.testing.assert_array_equal(llr_index(s, 4), s.theta_hat)
    np.testing.assert_array_equal(llc_index(s, 4), s.theta_hat)


def test_single_variable_index_is_ucb1():
    s = state_of([0.2, 0.7, 0.4], [3, 8, 1], 50)
    expected = s.theta_hat + np.sqrt(2 * math.log(50) / s.m)
    np.testing.assert_allclose(llr_index(s, 1), expected, rtol=0, atol=1e-15)


def test_bonus_cancels():
    s = state_of([0.2, 0.7, 0.4], [3, 8, 1], 50)
    np.testing.assert_allclose(llr_index(s, 3) + llc_index(s, 3), 2 * s.theta_hat, atol=1e-15)


def test_unobserved_variable_blocks_index():
    with pytest.raises(InitializationIncomplete):
        llr_index(state_of([0.2, 0.0], [3, 0], 5), 1)
    with pytest.raises(InitializationIncomplete):
        llc_index(state_of([0.2, 0.0], [3, 0], 5), 1)


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 1), st.integers(1, 10_000), st.integers(2, 10**7), st.integers(1, 50))
def test_index_monotonicity_and_optimism(theta, m, n, L):
    up = llr_index(state_of([theta], [m], n), L)[0]
    assert up > theta
    assert llr_index(state_of([theta], [m + 1], n), L)[0] < up
    assert llr_index(state_of([theta], [m], n + 1), L)[0] > up
    down = llc_index(state_of([theta], [m], n), L)[0]
    assert down < theta
    assert llc_index(state_of([theta], [m + 1], n), L)[0] > down
    assert llc_index(state_of([theta], [m], n + 1), L)[0] < down


# --- selection ----------------------------------------------------------------

def test_least_observed_variable_is_explored(unit_arms4):
    policy = LLR(unit_arms4)
    policy.state = state_of([0.5] * 4, [5, 5, 2, 5], 0)
    assert policy.select(30)[0].indices == (2,)
    assert policy.state.n == 30


def test_straight_line_transcript():
    """Arm choices of LLR against a fixed observation log.

    The expected sequence comes from a separate straight-line script that
    recomputes means, counts and indices by hand (arms {0,1}, {1,2}, {3}).
    """
    expected = [0, 1, 1, 2, 0, 0, 1, 0, 1, 2, 1, 0, 0, 1, 1, 0, 2, 1, 0, 1,
                0, 0, 1, 2, 1, 0, 1, 0, 1, 1, 0, 1, 0, 2, 0, 1, 1, 0, 1, 1]
    arms = ExplicitArms.from_supports([[0, 1], [1, 2], [3]], 4)
    policy = LLR(arms)
    position = {a.indices: k for k, a in enumerate(arms.arms)}
    schedule = policy.initialize()
    got = []
    for n in range(1, 41):
        arm = schedule[n - 1][1] if n <= len(schedule) else policy.select(n)[0]
        policy.observe([arm], [{i: ((7 * n + 3 * i) % 10) / 10 for i in arm.indices}])
        got.append(position[arm.indices])
    assert got == expected


def test_llc_picks_cheapest_when_estimates_are_exact():
    arms = ExplicitArms.singletons(3)
    policy = LLC(arms)
    policy.state = state_of([0.9, 0.1, 0.5], [10**6] * 3, 0)
    assert policy.select(10)[0].indices == (1,)


def test_llc_counts_floored_periods(triangle_paths):
    policy = LLC(triangle_paths)
    policy.state = state_of([0.1, 0.1, 0.9], [1, 1, 1], 0)
    policy.select(100)
    assert policy.floored_periods == 1


def test_llrk_plays_k_distinct_arms():
    arms = ExplicitArms.singletons(6)
    policy = LLRK(arms, 3)
    policy.state = state_of([0.1, 0.9, 0.3, 0.8, 0.2, 0.7], [10**6] * 6, 0)
    chosen = policy.select(10)
    assert [a.indices for a in chosen] == [(1,), (3,), (5,)]


def test_llrk_requires_explicit_arms_and_valid_k():
    with pytest.raises(ConfigurationError):
        LLRK(BipartiteMatching(2, 3), 2)
    with pytest.raises(ConfigurationError):
        LLRK(ExplicitArms.singletons(3), 4)


def test_llrk_counts_overlapping_observations_twice():
    arms = ExplicitArms.from_supports([[0, 1], [1, 2]], 3)
    policy = LLRK(arms, 2)
    policy.observe(list(arms.arms), [{0: 1.0, 1: 1.0}, {1: 0.0, 2: 0.0}])
    assert policy.state.m.tolist() == [1, 2, 1]
    assert policy.state.theta_hat[1] == 0.5


# --- initialization -----------------------------------------------------------

def test_unit_vectors_warm_up_in_order(unit_arms4):
    sched = LLR(unit_arms4).initialize()
    assert [(p, a.indices) for p, a in sched] == [(1, (0,)), (2, (1,)), (3, (2,)), (4, (3,))]


def test_two_by_two_grid_is_tiled_by_two_matchings():
    arms = initialization_schedule(BipartiteMatching(2, 2), "greedy")
    assert [a.indices for a in arms] == [(0, 3), (1, 2)]
    literal = initialization_schedule(BipartiteMatching(2, 2), "literal")
    assert len(literal) == 4
    assert set().union(*(a.indices for a in literal)) == {0, 1, 2, 3}


@pytest.mark.parametrize("mode", ["literal", "greedy"])
def test_warm_up_covers_every_variable(mode):
    _, problem, _ = paper_instance("q9m5", enumerate_limit=None)
    arms = initialization_schedule(problem, mode)
    assert len(arms) <= problem.n_vars
    assert set().union(*(a.indices for a in arms)) == set(range(problem.n_vars))


def test_literal_warm_up_period_p_contains_variable_p_minus_one():
    _, problem, _ = paper_instance("q7m4", enumerate_limit=None)
    arms = initialization_schedule(problem, "literal")
    assert len(arms) == problem.n_vars
    assert all(p in a.indices for p, a in enumerate(arms))


def test_dead_variable_is_rejected():
    p = SourceDestPaths(3, ((0, 1), (1, 2), (2, 0)), 0, 2)
    with pytest.raises(ConfigurationError, match="dead variable 2"):
        initialization_schedule(p)


def test_naive_warm_up_plays_each_arm_once():
    policy = NaiveUCB1(BipartiteMatching(2, 3))
    sched = policy.initialize()
    assert len(sched) == 6
    assert len({a.indices for _, a in sched}) == 6


# --- naive UCB1 ---------------------------------------------------------------

def test_naive_update_two_samples():
    s = NaiveState(np.array([1.0]), np.array([1]), 1)
    naive_update(s, 0, 2.0)
    assert s.y_hat[0] == 1.5 and s.m_arm[0] == 2


def test_naive_update_first_sample():
    s = NaiveState(np.zeros(2), np.zeros(2, dtype=np.int64), 0)
    naive_update(s, 1, 0.37)
    assert s.y_hat[1] == 0.37 and s.m_arm[1] == 1


def test_naive_update_bounds():
    with pytest.raises(ContractViolation):
        naive_update(NaiveState(np.zeros(2), np.zeros(2, dtype=np.int64)), 2, 1.0)


def test_naive_update_batch_means():
    rng = np.random.default_rng(21)
    s = NaiveState(np.zeros(5), np.zeros(5, dtype=np.int64))
    log = [[] for _ in range(5)]
    for _ in range(500):
        k, r = int(rng.integers(0, 5)), float(rng.random() * 3)
        naive_update(s, k, r)
        log[k].append(r)
    for k in range(5):
        assert abs(s.y_hat[k] - np.mean(log[k])) <= 1e-12


def test_naive_needs_every_arm_played():
    policy = NaiveUCB1(ExplicitArms.singletons(3))
    with pytest.raises(InitializationIncomplete):
        policy.select(4)


# --- equivalence of LLR with L = 1 and UCB1 on singletons ---------------------

def test_llr_with_one_variable_per_arm_replays_ucb1():
    env = EnvironmentSpec.bernoulli([0.1, 0.3, 0.5, 0.7, 0.9])
    arms = ExplicitArms.singletons(5)
    plan = ExperimentPlan(env, arms, (PolicyConfig("LLR", exploration_L=1),
                                      PolicyConfig("NaiveUCB1")), horizon=2000, n_runs=1)
    a = arm_sequence(plan.policies[0], plan, 3)
    b = arm_sequence(plan.policies[1], plan, 3)
    assert a == b


def test_index_vectors_coincide_every_period():
    arms = ExplicitArms.singletons(4)
    llr, naive = LLR(arms, exploration_L=1), NaiveUCB1(arms)
    rng = np.random.default_rng(4)
    for n, arm in llr.initialize():
        x = {arm.indices[0]: float(rng.random() < 0.5)}
        llr.observe([arm], [x])
        naive.observe([arm], [x])
    for n in range(5, 400):
        np.testing.assert_array_equal(llr.index(n), naive.index(n))
        (arm,) = llr.select(n)
        assert naive.select(n)[0] == arm
        x = {arm.indices[0]: float(rng.random() < 0.3 + 0.1 * arm.indices[0])}
        llr.observe([arm], [x])
        naive.observe([arm], [x])


# --- storage and configuration --------------------------------------------------

def _container_sizes(obj):
    sizes = []
    for name, value in vars(obj).items():
        if name == "problem":
            continue
        if isinstance(value, np.ndarray):
            sizes.append(value.size)
        elif isinstance(value, (list, tuple, dict, set)):
            sizes.append(len(value))
        elif isinstance(value, (EstimatorState, NaiveState)):
            sizes.extend(_container_sizes(value))
    return sizes


@pytest.mark.parametrize("kind", ["LLR", "LLC"])
def test_index_policy_memory_is_linear_in_variables(kind):
    _, problem, _ = paper_instance("q9m5", enumerate_limit=None)
    policy = make_policy(PolicyConfig(kind), problem)
    sizes = _container_sizes(policy)
    assert sizes and max(sizes) == problem.n_vars == 45


def test_naive_memory_grows_with_arm_count():
    _, problem, _ = paper_instance("q7m4", enumerate_limit=None)
    policy = make_policy(PolicyConfig("NaiveUCB1"), problem)
    assert max(_container_sizes(policy.state)) == 840


@pytest.mark.parametrize("kwargs", [
    dict(kind="UCB2"), dict(kind="LLR_K"), dict(kind="LLR_K", K=0), dict(kind="LLR", K=2),
    dict(kind="LLR", exploration_L=0), dict(kind="LLR", init_mode="random"),
])
def test_policy_config_validation(kwargs):
    with pytest.raises(ConfigurationError):
        PolicyConfig(**kwargs)


def test_policy_labels():
    assert PolicyConfig("LLR_K", K=3).label == "LLR_K3"
    assert PolicyConfig("NaiveUCB1").label == "NaiveUCB1"


def test_bonus_scale():
    assert bonus_scale(3, 1) == 0.0
    assert bonus_scale(1, 100) == math.sqrt(2 * math.log(100))


def test_determinism_of_whole_runs():
    env = EnvironmentSpec.bernoulli([0.2, 0.6, 0.4, 0.5])
    arms = ExplicitArms.from_supports([[0, 1], [2, 3], [1, 2]], 4)
    plan = ExperimentPlan(env, arms, (PolicyConfig("LLR"),), 3000, 2, master_seed=8)
    a, b = run_experiment(plan, engine="python"), run_experiment(plan, engine="python")
    for x, y in zip(a, b):
        assert x.cum_regret.tobytes() == y.cum_regret.tobytes()
