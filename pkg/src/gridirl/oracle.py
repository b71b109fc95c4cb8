"""Brute-force path enumeration oracles for small grids.

These walk every action sequence explicitly (no Bellman reuse), so they are
independent references for the planner, visitation and training modules.
Only tractable on tiny problems; guarded at 8^horizon <= 1e6.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DemoInfeasible, TooLarge
from .grid import ACTIONS, GridSpec, State, successor
from .planner import Policy
from .reward import FeatureMap, Theta, dist_p, validate_p

MAX_SEQUENCES = 10 ** 6


@dataclass
class EnumerationProblem:
    """A small grid instance to enumerate: start, goal, rewards, horizon cap."""

    spec: GridSpec
    start: State
    goal: State
    theta: Theta
    features: FeatureMap
    horizon: int
    p: float | None = None

    def __post_init__(self):
        validate_p(self.p)
        if len(ACTIONS) ** self.horizon > MAX_SEQUENCES:
            raise TooLarge(f"8^{self.horizon} action sequences exceed the guard")


@dataclass
class EnumeratedPath:
    states: tuple[State, ...]
    reward: float
    prob: float = 0.0

    @property
    def n_steps(self) -> int:
        return len(self.states) - 1


def _step_reward(r: np.ndarray, s: State, s_next: State, p: float | None) -> float:
    base = float(r[s.y, s.x])
    if p is None:
        return base
    return base / dist_p(s, s_next, p)


def enumerate_paths(
    problem: EnumerationProblem,
    absorbing: bool = True,
    exact_length: bool = False,
) -> list[EnumeratedPath]:
    """All action paths from start that end at the goal cell.

    absorbing (the default) stops a path at its first goal visit and keeps
    any length up to the horizon, matching the absorbing backward pass.
    exact_length=True instead keeps paths of exactly `horizon` steps and
    lets them cross the goal cell mid-way, matching time-augmented
    semantics. A path's reward sums the step rewards of every state except
    the final one. Probabilities are normalized over the returned set.
    """
    spec2d = problem.spec.with_horizon(None)
    r = problem.features.reward_field(problem.theta)
    goal_xy = problem.goal.xy
    out: list[EnumeratedPath] = []

    def rec(s: State, states: list[State], reward: float, depth: int):
        if absorbing and s.xy == goal_xy:
            out.append(EnumeratedPath(tuple(states), reward))
            return
        if depth == problem.horizon:
            if not absorbing and exact_length and s.xy == goal_xy:
                out.append(EnumeratedPath(tuple(states), reward))
            return
        for a in ACTIONS:
            nxt = successor(s, a, spec2d)
            states.append(nxt)
            rec(nxt, states, reward + _step_reward(r, s, nxt, problem.p), depth + 1)
            states.pop()

    start = State(problem.start.x, problem.start.y)
    rec(start, [start], 0.0, 0)

    if out:
        logw = np.array([path.reward for path in out])
        mx = logw.max()
        log_z = mx + np.log(np.exp(logw - mx).sum())
        for path, lw in zip(out, logw):
            path.prob = float(np.exp(lw - log_z))
    return out


def soft_value_from_paths(paths: list[EnumeratedPath]) -> float:
    """log sum exp of enumerated path rewards (-inf when no path exists)."""
    if not paths:
        return -np.inf
    logw = np.array([p.reward for p in paths])
    mx = logw.max()
    return float(mx + np.log(np.exp(logw - mx).sum()))


def path_feature_total(states: tuple[State, ...], features: FeatureMap) -> np.ndarray:
    """Summed feature vector over every state of a path, final state included."""
    total = np.zeros(features.n_features)
    for s in states:
        total += features.at(State(s.x, s.y))
    return total


def exact_log_likelihood(
    problem: EnumerationProblem, demos: list[tuple[State, ...]]
) -> float:
    """Mean log of the normalized enumerated probability of each demo path."""
    paths = enumerate_paths(problem)
    if not paths:
        raise DemoInfeasible("no path reaches the goal within the horizon")
    index = {tuple((s.x, s.y) for s in p.states): p for p in paths}
    total = 0.0
    for demo in demos:
        key = tuple((s.x, s.y) for s in demo)
        hit = index.get(key)
        if hit is None:
            raise DemoInfeasible(f"demo {key} not in the enumerated path set")
        total += np.log(hit.prob)
    return float(total / len(demos))


def visitation_by_enumeration(
    policy: Policy,
    spec: GridSpec,
    start: State,
    goal: State,
    n_steps: int,
) -> np.ndarray:
    """Expected occupancy of the first n_steps time slots by explicit path walk.

    Mirrors forward_pass semantics independently: walks every positive
    probability action sequence, accumulating the walk's probability into
    each visited cell, counting a goal visit at its arrival slot and
    stopping the walk there.
    """
    if len(ACTIONS) ** n_steps > MAX_SEQUENCES:
        raise TooLarge(f"8^{n_steps} sequences exceed the guard")
    d = np.zeros(spec.shape)
    probs = policy.probs

    def rec(s: State, weight: float, slot: int):
        if slot >= n_steps:
            return
        d[s.y, s.x] += weight
        if s.xy == goal.xy:
            return
        row = probs[s.y, s.x]
        for i, a in enumerate(ACTIONS):
            if row[i] == 0.0:
                continue
            rec(successor(s, a, spec), weight * row[i], slot + 1)

    rec(State(start.x, start.y), 1.0, 0)
    return d
