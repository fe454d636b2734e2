"""Two toy optimizers annotated as regulators.

Gradient descent on the quadratic bowl f(x) = 0.5 * ||x - target||^2 and
tabular Q-learning on a deterministic gridworld, each returned together
with a role annotation naming which algorithm component plays which part
of a closed-loop regulation motif (system, regulator, internal model,
disturbance, goal, output domain, feedback leg). The assignments are an
interpretation and are marked as such in the annotation metadata.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import SplitMix64

ROLES = ("S", "R", "M", "D", "G", "Z", "feedback", "feedforward")


@dataclass(frozen=True)
class RoleAnnotation:
    """One regulation role per named algorithm component."""

    assignments: dict[str, str]
    interpretive: bool = True

    def __post_init__(self) -> None:
        for comp, role in self.assignments.items():
            if role not in ROLES:
                raise ValueError(f"component {comp!r} assigned unknown role {role!r}")


class GdDivergenceError(ValueError):
    """Step size too large for the quadratic objective; iterates diverge."""


def gd_regulate(
    target: tuple[float, float],
    x0: tuple[float, float],
    lr: float,
    iters: int,
) -> tuple[np.ndarray, RoleAnnotation]:
    """Gradient descent on 0.5 * ||x - target||^2.

    x_{k+1} = x_k - lr * (x_k - target); the contraction factor is |1 - lr|,
    so lr >= 2 is rejected up front rather than silently blowing up. Returns
    the iterate trajectory, shape (iters + 1, 2), including x0.
    """
    if lr <= 0:
        raise ValueError(f"step size must be positive, got {lr}")
    if lr >= 2:
        raise GdDivergenceError(
            f"step size {lr} >= 2 diverges on the quadratic objective "
            f"(contraction factor |1 - lr| = {abs(1 - lr):g} >= 1)"
        )
    if iters < 1:
        raise ValueError(f"need at least 1 iteration, got {iters}")
    t = np.asarray(target, dtype=float)
    x = np.asarray(x0, dtype=float)
    traj = np.empty((iters + 1, 2), dtype=float)
    traj[0] = x
    for k in range(iters):
        x = x - lr * (x - t)
        traj[k + 1] = x
    annotation = RoleAnnotation(
        assignments={
            "objective_landscape": "S",
            "update_rule": "R",
            "gradient_evaluation": "feedback",
            "iterate": "Z",
            "target": "G",
        }
    )
    return traj, annotation


@dataclass(frozen=True)
class QConfig:
    """Deterministic gridworld with moves N/S/E/W clamped at the walls.
    Stepping costs ``step_reward``; entering the goal cell ends the episode
    with ``goal_reward``."""

    width: int
    height: int
    goal_cell: tuple[int, int]
    step_reward: float = -1.0
    goal_reward: float = 0.0
    learn_rate: float = 0.5
    discount: float = 0.9
    exploration: float = 0.1
    episodes: int = 500
    init_value: float = 0.0
    max_episode_steps: int | None = None

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValueError(f"grid must be at least 1x1, got {self.width}x{self.height}")
        gx, gy = self.goal_cell
        if not (0 <= gx < self.width and 0 <= gy < self.height):
            raise ValueError(f"goal cell {self.goal_cell} is outside the grid")
        if not (0 < self.learn_rate <= 1):
            raise ValueError(f"learn rate must be in (0, 1], got {self.learn_rate}")
        if not (0 <= self.discount < 1):
            raise ValueError(f"discount must be in [0, 1), got {self.discount}")
        if not (0 <= self.exploration <= 1):
            raise ValueError(f"exploration must be in [0, 1], got {self.exploration}")


# N, S, E, W displacements; ties in the greedy argmax break toward the
# lowest action index, which the oracle must mirror.
ACTIONS = ((0, -1), (0, 1), (1, 0), (-1, 0))
ACTION_NAMES = ("N", "S", "E", "W")


def _grid_step(cfg: QConfig, cell: tuple[int, int], a: int) -> tuple[int, int]:
    dx, dy = ACTIONS[a]
    nx = min(max(cell[0] + dx, 0), cfg.width - 1)
    ny = min(max(cell[1] + dy, 0), cfg.height - 1)
    return (nx, ny)


def q_regulate(
    cfg: QConfig, seed: int
) -> tuple[dict[tuple[int, int], int], dict[tuple[int, int], np.ndarray], RoleAnnotation]:
    """Tabular Q-learning, epsilon-greedy with a fixed epsilon.

    Returns (greedy policy, Q table, role annotation); the policy maps every
    non-goal cell to the greedy action index after the configured number of
    episodes.
    """
    rng = SplitMix64(seed)
    cells = [(x, y) for y in range(cfg.height) for x in range(cfg.width)]
    q: dict[tuple[int, int], np.ndarray] = {
        c: np.full(len(ACTIONS), cfg.init_value, dtype=float) for c in cells
    }
    q[cfg.goal_cell] = np.zeros(len(ACTIONS))  # terminal: no future value
    step_cap = cfg.max_episode_steps or 8 * cfg.width * cfg.height
    starts = [c for c in cells if c != cfg.goal_cell]

    for _ in range(cfg.episodes):
        if not starts:
            break
        cell = starts[rng.next_below(len(starts))]
        for _ in range(step_cap):
            if rng.next_float() < cfg.exploration:
                a = rng.next_below(len(ACTIONS))
            else:
                a = int(np.argmax(q[cell]))
            nxt = _grid_step(cfg, cell, a)
            done = nxt == cfg.goal_cell
            reward = cfg.goal_reward if done else cfg.step_reward
            best_next = 0.0 if done else float(np.max(q[nxt]))
            q[cell][a] += cfg.learn_rate * (
                reward + cfg.discount * best_next - q[cell][a]
            )
            cell = nxt
            if done:
                break

    policy = {c: int(np.argmax(q[c])) for c in cells if c != cfg.goal_cell}
    annotation = RoleAnnotation(
        assignments={
            "environment": "S",
            "q_update": "R",
            "q_table": "M",
            "exploration_draws": "D",
            "goal_cell": "G",
        }
    )
    return policy, q, annotation


def value_iteration_policy(
    cfg: QConfig, tol: float = 1e-12, max_sweeps: int = 100_000
) -> dict[tuple[int, int], int]:
    """Independent optimal policy for the same gridworld, by value iteration
    with the same lowest-index tie-break."""
    cells = [(x, y) for y in range(cfg.height) for x in range(cfg.width)]
    v = {c: 0.0 for c in cells}
    for _ in range(max_sweeps):
        delta = 0.0
        for c in cells:
            if c == cfg.goal_cell:
                continue
            best = -np.inf
            for a in range(len(ACTIONS)):
                nxt = _grid_step(cfg, c, a)
                r = cfg.goal_reward if nxt == cfg.goal_cell else cfg.step_reward
                val = r + cfg.discount * (0.0 if nxt == cfg.goal_cell else v[nxt])
                best = max(best, val)
            delta = max(delta, abs(best - v[c]))
            v[c] = best
        if delta < tol:
            break
    policy = {}
    for c in cells:
        if c == cfg.goal_cell:
            continue
        vals = []
        for a in range(len(ACTIONS)):
            nxt = _grid_step(cfg, c, a)
            r = cfg.goal_reward if nxt == cfg.goal_cell else cfg.step_reward
            vals.append(r + cfg.discount * (0.0 if nxt == cfg.goal_cell else v[nxt]))
        policy[c] = int(np.argmax(vals))
    return policy
