"""Trajectory generation from a learned policy.

Deterministic rollouts repeatedly take the argmax action (ties broken by
the fixed N, NE, E, SE, S, SW, W, NW order); stochastic rollouts sample
from the policy rows with an independent seeded stream per retry. Both are
used to bridge a missing trajectory segment between two anchor states.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, GapUnreachable
from .grid import ACTIONS, GridSpec, State, chebyshev, successor
from .planner import Policy, ValueArtifacts, make_policy


@dataclass
class GapQuery:
    """One generation request between two states."""

    start: State
    goal: State
    max_steps: int
    mode: str = "deterministic"
    retries: int = 1
    rng_seed: int = 0

    def __post_init__(self):
        if self.mode not in ("deterministic", "stochastic"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.max_steps < chebyshev(self.start, self.goal):
            raise ConfigError("max_steps below the Chebyshev distance to the goal")
        if self.retries < 1:
            raise ConfigError("retries must be >= 1")


@dataclass
class GeneratedPath:
    states: list[State]
    reached_goal: bool
    attempts_used: int = 1


def _policy_row(policy: Policy, s: State) -> np.ndarray:
    if policy.probs.ndim == 4:
        return policy.probs[s.z, s.y, s.x]
    return policy.probs[s.y, s.x]


def _reached(s: State, goal: State) -> bool:
    if goal.z is None:
        return s.xy == goal.xy
    return s == goal


def rollout_deterministic(policy: Policy, q: GapQuery, spec: GridSpec) -> GeneratedPath:
    """Argmax walk from start until the goal, a revisit, or the step budget."""
    s = q.start
    states = [s]
    seen = {s}
    for _ in range(q.max_steps):
        if _reached(s, q.goal):
            break
        a = ACTIONS[int(np.argmax(_policy_row(policy, s)))]
        s = successor(s, a, spec)
        states.append(s)
        if s in seen:
            return GeneratedPath(states=states, reached_goal=False)
        seen.add(s)
    return GeneratedPath(states=states, reached_goal=_reached(states[-1], q.goal))


def _single_stochastic_walk(
    policy: Policy, q: GapQuery, spec: GridSpec, rng: np.random.Generator
) -> GeneratedPath:
    s = q.start
    states = [s]
    for _ in range(q.max_steps):
        if _reached(s, q.goal):
            break
        row = _policy_row(policy, s)
        a = ACTIONS[int(rng.choice(len(ACTIONS), p=row))]
        s = successor(s, a, spec)
        states.append(s)
    return GeneratedPath(states=states, reached_goal=_reached(states[-1], q.goal))


def rollout_stochastic(policy: Policy, q: GapQuery, spec: GridSpec) -> GeneratedPath:
    """Policy-sampled walk with retries; returns the best attempt on failure.

    Each attempt draws from an independent stream seeded by (rng_seed,
    attempt index), so runs are reproducible and retries uncorrelated.
    Sampling in time-augmented mode is rejected: a sampled walk cannot
    guarantee arrival at the fixed end layer.
    """
    if spec.time_augmented:
        raise ConfigError("stochastic generation is unavailable in time-augmented mode")
    best: GeneratedPath | None = None
    best_dist = np.inf
    for attempt in range(q.retries):
        rng = np.random.default_rng([q.rng_seed, attempt])
        walk = _single_stochastic_walk(policy, q, spec, rng)
        walk.attempts_used = attempt + 1
        if walk.reached_goal:
            return walk
        last = walk.states[-1]
        dist = float(np.hypot(last.x - q.goal.x, last.y - q.goal.y))
        if dist < best_dist:
            best, best_dist = walk, dist
    best.attempts_used = q.retries
    return best


def interpolate_gap(
    prefix: list[State],
    suffix: list[State],
    missing_steps: int,
    artifacts: ValueArtifacts,
    spec: GridSpec,
    mode: str = "deterministic",
    rng_seed: int = 0,
    retries: int = 3,
    budget_factor: float = 4,
    policy_rule: str = "q_only",
) -> tuple[list[State], GeneratedPath]:
    """Bridge the gap between prefix[-1] and suffix[0] with a generated path.

    missing_steps counts the removed fixes, so the bridge spans
    missing_steps + 1 transitions. In time-augmented mode the budget is
    exactly that span and the planner artifacts must cover horizon
    missing_steps + 2 with the goal on the last layer; in 2D the budget is
    budget_factor times the span. Raises GapUnreachable when no attempt
    ends at the gap's end state.
    """
    if not prefix or not suffix:
        raise ValueError("gap must be interior: both anchors required")
    if missing_steps == 0:
        return prefix + suffix, GeneratedPath(states=[prefix[-1]], reached_goal=True)

    span = missing_steps + 1
    if spec.time_augmented:
        start = State(prefix[-1].x, prefix[-1].y, 0)
        goal = State(suffix[0].x, suffix[0].y, span)
        budget = span
    else:
        start = prefix[-1]
        goal = suffix[0]
        budget = max(chebyshev(prefix[-1], suffix[0]), math.ceil(budget_factor * span))
    query = GapQuery(
        start=start,
        goal=goal,
        max_steps=budget,
        mode=mode,
        retries=retries,
        rng_seed=rng_seed,
    )
    policy = make_policy(artifacts, rule=policy_rule)
    if mode == "deterministic":
        walk = rollout_deterministic(policy, query, spec)
    else:
        walk = rollout_stochastic(policy, query, spec)
    if not walk.reached_goal:
        raise GapUnreachable(
            f"no attempt reached {goal.xy} from {start.xy} within {budget} steps"
        )
    bridge = [State(s.x, s.y) for s in walk.states[1:-1]]
    return prefix + bridge + suffix, walk
