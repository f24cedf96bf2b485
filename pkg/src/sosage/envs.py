"""Desk-scale reinforcement environments.

Each environment is a stateless transition function over an immutable episode
state: reset picks the initial state for an episode index, step maps
(state, action) to (next state, reinforcement, terminal). Returns are
undiscounted sums of per-step reinforcements. Episode cycling on xor is
deterministic so fitness is exact, not sampled.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import InvalidAction, ValidationError

ENV_NAMES = ("xor", "gridnav", "gridnav-compositional")


@dataclass(frozen=True)
class EnvSpec:
    name: str
    input_dim: int
    output_dim: int
    max_steps: int
    params: dict


@dataclass(frozen=True)
class Episode:
    """One rollout: (observation, action, reinforcement) triples and the
    undiscounted return."""

    steps: tuple[tuple[tuple[float, ...], int, float], ...]
    terminal: bool
    return_value: float


def episodic_return(episode: Episode) -> float:
    """Exact undiscounted sum of the episode's step reinforcements."""
    return sum(r for _, _, r in episode.steps)


class XorEnv:
    """Single-step XOR classification over the four +-1 input patterns.

    Episodes cycle the patterns in a fixed order; the action is the thresholded
    class of the network's single output and earns 1.0 when it matches the
    pattern's parity.
    """

    PATTERNS = ((-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0))

    input_dim = 2
    output_dim = 1
    max_steps = 1
    eval_episodes = 4

    def __init__(self) -> None:
        self.spec = EnvSpec("xor", self.input_dim, self.output_dim, self.max_steps, {})

    def reset(self, episode_index: int):
        return self.PATTERNS[episode_index % 4]

    def observation(self, state) -> tuple[float, ...]:
        return state

    def select_action(self, outputs: Sequence[float]) -> int:
        return 1 if outputs[0] > 0.0 else 0

    def step(self, state, action: int):
        if action not in (0, 1):
            raise InvalidAction(f"xor action must be 0 or 1, got {action}")
        target = 1 if (state[0] > 0.0) != (state[1] > 0.0) else 0
        return state, (1.0 if action == target else 0.0), True

    def succeeded(self, episode: Episode) -> bool:
        return bool(episode.steps) and episode.steps[-1][2] == 1.0


class GridNavEnv:
    """Grid navigation from a fixed start toward a goal, four move actions.

    The observation is (agent x, agent y, goal dx, goal dy), each mapped
    through v -> 2v/(size-1) - 1. The compositional variant keeps the same
    observation but pays the goal only after the subgoal has been visited, so
    following the goal delta is not enough: the policy has to route through
    the subgoal from position information alone.
    """

    # action -> (dx, dy); ties in select_action resolve to the lowest index
    MOVES = ((0, 1), (1, 0), (0, -1), (-1, 0))  # N, E, S, W

    eval_episodes = 1

    def __init__(
        self,
        size: int = 5,
        goal: tuple[int, int] = (4, 4),
        subgoal: tuple[int, int] | None = None,
        step_penalty: float = 0.01,
        goal_reward: float = 1.0,
        subgoal_reward: float = 0.5,
        max_steps: int = 50,
    ) -> None:
        if size < 2:
            raise ValidationError("env.params.size", "grid size must be >= 2")
        if max_steps > 4 * size * size:
            raise ValidationError(
                "env.params.max_steps", f"must be <= 4*size^2 = {4 * size * size}"
            )
        for label, (px, py) in (("goal", goal),) + ((("subgoal", subgoal),) if subgoal else ()):
            if not (0 <= px < size and 0 <= py < size):
                raise ValidationError(f"env.params.{label}", "must lie inside the grid")
        self.size = size
        self.goal = goal
        self.subgoal = subgoal
        self.step_penalty = step_penalty
        self.goal_reward = goal_reward
        self.subgoal_reward = subgoal_reward
        self.max_steps = max_steps
        self.input_dim = 4
        self.output_dim = 4
        name = "gridnav-compositional" if subgoal else "gridnav"
        params = {
            "size": size,
            "goal_x": goal[0],
            "goal_y": goal[1],
            "step_penalty": step_penalty,
            "goal_reward": goal_reward,
            "max_steps": max_steps,
        }
        if subgoal:
            params.update(subgoal_x=subgoal[0], subgoal_y=subgoal[1], subgoal_reward=subgoal_reward)
        self.spec = EnvSpec(name, self.input_dim, self.output_dim, max_steps, params)

    def reset(self, episode_index: int):
        # (x, y, steps taken, subgoal visited)
        return (0, 0, 0, False)

    def _norm(self, v: float) -> float:
        return 2.0 * v / (self.size - 1) - 1.0

    def observation(self, state) -> tuple[float, ...]:
        x, y, _, _ = state
        tx, ty = self.goal
        return (self._norm(x), self._norm(y), self._norm(tx - x), self._norm(ty - y))

    def select_action(self, outputs: Sequence[float]) -> int:
        best = 0
        for k in range(1, 4):
            if outputs[k] > outputs[best]:
                best = k
        return best

    def step(self, state, action: int):
        if not 0 <= action < 4:
            raise InvalidAction(f"gridnav action must be in 0..3, got {action}")
        x, y, steps, subgoal_done = state
        dx, dy = self.MOVES[action]
        nx = min(self.size - 1, max(0, x + dx))
        ny = min(self.size - 1, max(0, y + dy))
        steps += 1
        reward = -self.step_penalty
        terminal = steps >= self.max_steps
        if self.subgoal is not None and not subgoal_done and (nx, ny) == self.subgoal:
            subgoal_done = True
            reward += self.subgoal_reward
        goal_armed = subgoal_done or self.subgoal is None
        if goal_armed and (nx, ny) == self.goal:
            reward += self.goal_reward
            terminal = True
        return (nx, ny, steps, subgoal_done), reward, terminal

    def succeeded(self, episode: Episode) -> bool:
        if not episode.terminal or not episode.steps:
            return False
        final_reward = episode.steps[-1][2]
        return final_reward >= self.goal_reward - self.step_penalty - 1e-12


def make_env(name: str, params: Mapping[str, object] | None = None):
    """Build an environment from its config-facing name and flat params map."""
    params = dict(params or {})
    if name == "xor":
        if params:
            raise ValidationError("env.params", f"xor takes no params, got {sorted(params)}")
        return XorEnv()
    if name in ("gridnav", "gridnav-compositional"):
        size = int(params.pop("size", 5))
        goal = (int(params.pop("goal_x", size - 1)), int(params.pop("goal_y", size - 1)))
        subgoal = None
        if name == "gridnav-compositional":
            subgoal = (int(params.pop("subgoal_x", 0)), int(params.pop("subgoal_y", size - 1)))
        kwargs = {}
        for key in ("step_penalty", "goal_reward", "subgoal_reward"):
            if key in params:
                kwargs[key] = float(params.pop(key))
        if "max_steps" in params:
            kwargs["max_steps"] = int(params.pop("max_steps"))
        if params:
            raise ValidationError("env.params", f"unknown keys {sorted(params)}")
        return GridNavEnv(size=size, goal=goal, subgoal=subgoal, **kwargs)
    raise ValidationError("env.name", f"must be one of {ENV_NAMES}, got {name!r}")
