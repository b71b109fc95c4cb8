import numpy as np
import pytest

from gridirl import (
    BackupOperator,
    FeatureMap,
    GapQuery,
    GridSpec,
    Policy,
    State,
    Theta,
    backward_pass,
    interpolate_gap,
    make_policy,
    rollout_deterministic,
    rollout_stochastic,
)
from gridirl.errors import ConfigError, GapUnreachable
from gridirl.grid import ACTIONS, chebyshev

from helpers import dijkstra_cost


def uniform_cost_policy(spec, goal):
    art = backward_pass(
        spec, goal, Theta(np.array([-1.0])),
        FeatureMap(np.ones((1,) + spec.shape)), backup=BackupOperator.HARD_MAX,
    )
    return art, make_policy(art, rule="q_only")


class TestDeterministicRollout:
    def test_corridor_straight_path(self):
        spec = GridSpec(width=5, height=1)
        goal = State(4, 0)
        _, policy = uniform_cost_policy(spec, goal)
        walk = rollout_deterministic(policy, GapQuery(State(0, 0), goal, 10), spec)
        assert walk.reached_goal
        assert walk.states == [State(x, 0) for x in range(5)]

    def test_start_equals_goal(self):
        spec = GridSpec(width=3, height=3)
        _, policy = uniform_cost_policy(spec, State(1, 1))
        walk = rollout_deterministic(policy, GapQuery(State(1, 1), State(1, 1), 5), spec)
        assert walk.reached_goal
        assert walk.states == [State(1, 1)]

    def test_path_length_equals_chebyshev(self):
        # uniform cost: greedy rollouts realize shortest 8-neighbor paths
        spec = GridSpec(width=8, height=8)
        goal = State(6, 2)
        _, policy = uniform_cost_policy(spec, goal)
        cost = dijkstra_cost(spec, goal, lambda s, t: 1.0)
        for start in (State(0, 0), State(7, 7), State(0, 5), State(3, 3)):
            walk = rollout_deterministic(
                policy, GapQuery(start, goal, max_steps=30), spec
            )
            assert walk.reached_goal
            assert len(walk.states) - 1 == chebyshev(start, goal) == cost[start.y, start.x]

    def test_pure_function(self):
        spec = GridSpec(width=6, height=6)
        _, policy = uniform_cost_policy(spec, State(5, 5))
        q = GapQuery(State(0, 0), State(5, 5), 20)
        assert rollout_deterministic(policy, q, spec).states == \
            rollout_deterministic(policy, q, spec).states

    def test_loop_detection_aborts(self):
        # a constant-north policy pins against the wall and revisits
        spec = GridSpec(width=3, height=3)
        probs = np.zeros(spec.shape + (8,))
        probs[..., ACTIONS.index((0, 1))] = 1.0
        walk = rollout_deterministic(
            Policy(probs=probs), GapQuery(State(1, 0), State(2, 0), 10), spec
        )
        assert not walk.reached_goal
        assert len(walk.states) <= 5

    def test_adjacency_invariant(self):
        spec = GridSpec(width=8, height=8)
        _, policy = uniform_cost_policy(spec, State(7, 0))
        walk = rollout_deterministic(policy, GapQuery(State(0, 7), State(7, 0), 30), spec)
        for a, b in zip(walk.states, walk.states[1:]):
            assert chebyshev(a, b) <= 1
        assert walk.states[0] == State(0, 7)


class TestStochasticRollout:
    def test_one_hot_equals_deterministic(self):
        spec = GridSpec(width=5, height=5)
        goal = State(4, 4)
        art, _ = uniform_cost_policy(spec, goal)
        # one-hot rows at the deterministic argmax
        greedy = make_policy(art, rule="q_only").probs.argmax(axis=-1)
        probs = np.zeros(spec.shape + (8,))
        for y in range(5):
            for x in range(5):
                probs[y, x, greedy[y, x]] = 1.0
        one_hot = Policy(probs=probs)
        q = GapQuery(State(0, 0), goal, 20, mode="stochastic", retries=2, rng_seed=7)
        sto = rollout_stochastic(one_hot, q, spec)
        det = rollout_deterministic(one_hot, q, spec)
        assert sto.states == det.states
        assert sto.reached_goal

    def test_fixed_seed_reproducible(self):
        spec = GridSpec(width=6, height=6)
        _, policy = uniform_cost_policy(spec, State(5, 3))
        q = GapQuery(State(0, 0), State(5, 3), 40, mode="stochastic", retries=4, rng_seed=123)
        assert rollout_stochastic(policy, q, spec).states == \
            rollout_stochastic(policy, q, spec).states

    def test_single_step_action_frequencies(self):
        # binomial check: one-step samples from a uniform row
        spec = GridSpec(width=3, height=3)
        policy = Policy(probs=np.full(spec.shape + (8,), 1 / 8))
        n = 100_000
        counts = np.zeros(8, dtype=int)
        center = State(1, 1)
        unreachable = State(2, 2)
        for i in range(n):
            q = GapQuery(center, unreachable, 1, mode="stochastic", retries=1, rng_seed=i)
            walk = rollout_stochastic(policy, q, spec)
            step = (walk.states[1].x - 1, walk.states[1].y - 1)
            counts[ACTIONS.index(step)] += 1
        p = 1 / 8
        bound = 3 * np.sqrt(p * (1 - p) / n)
        np.testing.assert_allclose(counts / n, np.full(8, p), atol=bound)

    def test_retries_return_best_attempt(self):
        # goal can never be reached: policy pushes away from it
        spec = GridSpec(width=4, height=1)
        probs = np.zeros(spec.shape + (8,))
        probs[..., ACTIONS.index((-1, 0))] = 1.0
        q = GapQuery(State(2, 0), State(3, 0), 3, mode="stochastic", retries=5, rng_seed=0)
        walk = rollout_stochastic(Policy(probs=probs), q, spec)
        assert not walk.reached_goal
        assert walk.attempts_used == 5

    def test_time_augmented_rejected(self):
        spec = GridSpec(width=4, height=4, horizon=5)
        policy = Policy(probs=np.full((5, 4, 4, 8), 1 / 8))
        q = GapQuery(State(0, 0, 0), State(3, 3, 4), 4, mode="stochastic")
        with pytest.raises(ConfigError):
            rollout_stochastic(policy, q, spec)


class TestGapQueryValidation:
    def test_budget_below_distance(self):
        with pytest.raises(ConfigError):
            GapQuery(State(0, 0), State(5, 5), max_steps=3)

    def test_bad_mode(self):
        with pytest.raises(ConfigError):
            GapQuery(State(0, 0), State(1, 1), 5, mode="greedy")

    def test_bad_retries(self):
        with pytest.raises(ConfigError):
            GapQuery(State(0, 0), State(1, 1), 5, retries=0)


class TestInterpolateGap:
    def test_zero_length_gap_unchanged(self):
        spec = GridSpec(width=4, height=4)
        art, _ = uniform_cost_policy(spec, State(3, 3))
        prefix = [State(0, 0), State(1, 1)]
        suffix = [State(2, 2), State(3, 3)]
        completed, walk = interpolate_gap(prefix, suffix, 0, art, spec)
        assert completed == prefix + suffix
        assert walk.reached_goal

    def test_straight_gap_deterministic(self):
        # uniform cost, north-aligned anchors: N wins argmax ties, so the
        # completion is the straight line and matches the oracle's cost
        spec = GridSpec(width=8, height=8)
        art, _ = uniform_cost_policy(spec, State(3, 6))
        completed, walk = interpolate_gap([State(3, 1)], [State(3, 6)], 4, art, spec)
        assert completed == [State(3, y) for y in range(1, 7)]
        cost = dijkstra_cost(spec, State(3, 6), lambda s, t: 1.0)
        assert len(completed) - 1 == cost[1, 3]

    def test_horizontal_gap_shortest_length(self):
        # east-aligned anchors: diagonal ties may zigzag, but the bridge
        # still realizes the shortest-path step count
        spec = GridSpec(width=8, height=8)
        art, _ = uniform_cost_policy(spec, State(6, 3))
        completed, walk = interpolate_gap([State(1, 3)], [State(6, 3)], 4, art, spec)
        cost = dijkstra_cost(spec, State(6, 3), lambda s, t: 1.0)
        assert walk.reached_goal
        assert len(completed) - 1 == cost[3, 1] == 5

    def test_stochastic_seeded_reproducible(self):
        spec = GridSpec(width=8, height=8)
        art, _ = uniform_cost_policy(spec, State(7, 7))
        args = ([State(0, 0)], [State(7, 7)], 6, art, spec)
        a, _ = interpolate_gap(*args, mode="stochastic", rng_seed=5, retries=10)
        b, _ = interpolate_gap(*args, mode="stochastic", rng_seed=5, retries=10)
        assert a == b

    def test_unreachable_raises(self):
        spec = GridSpec(width=4, height=1)
        art, _ = uniform_cost_policy(spec, State(3, 0))
        # doctor the artifacts so the policy walks west, away from the goal
        art.q[...] = -np.inf
        art.q[..., ACTIONS.index((-1, 0))] = -1.0
        with pytest.raises(GapUnreachable):
            interpolate_gap([State(2, 0)], [State(3, 0)], 2, art, spec, retries=2)

    def test_time_augmented_exact_budget(self):
        spec = GridSpec(width=6, height=6)
        theta = Theta(np.array([-1.0]))
        fm = FeatureMap(np.ones((1, 6, 6)))
        missing = 3
        gap_spec = spec.with_horizon(missing + 2)
        goal = State(4, 4, missing + 1)
        art = backward_pass(gap_spec, goal, theta, fm, backup=BackupOperator.SOFTMAX_APPROX)
        completed, walk = interpolate_gap(
            [State(1, 2)], [State(4, 4)], missing, art, gap_spec
        )
        # bridge spans exactly missing + 1 transitions
        assert len(completed) == missing + 2
        assert completed[0] == State(1, 2)
        assert completed[-1] == State(4, 4)
        assert walk.reached_goal
