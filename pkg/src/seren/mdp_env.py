"""Finite MDPs and the built-in environments.

A :class:`TabularMdp` is immutable once built. Stepping draws exactly one
uniform number from the caller's generator, which keeps trajectories
reproducible under a fixed draw order.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Mapping, NamedTuple, Sequence

import numpy as np

ROW_SUM_TOL = 1e-9

# grid actions
NORTH, EAST, SOUTH, WEST = 0, 1, 2, 3
_MOVES = {NORTH: (0, -1), EAST: (1, 0), SOUTH: (0, 1), WEST: (-1, 0)}

LEFT, RIGHT = 0, 1


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=float, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class TabularMdp:
    """The environment tuple (S, A, P, R, gamma) plus start and terminal states.

    ``transition[s, a, s']`` is P(s' | s, a) and ``reward[s, a]`` the
    expected immediate reward.
    """

    transition: np.ndarray
    reward: np.ndarray
    discount: float
    start_state: int = 0
    terminal_states: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        P = _readonly(self.transition)
        R = _readonly(self.reward)
        object.__setattr__(self, "transition", P)
        object.__setattr__(self, "reward", R)
        object.__setattr__(self, "terminal_states", frozenset(int(s) for s in self.terminal_states))

        if P.ndim != 3 or P.shape[0] != P.shape[2]:
            raise ValueError(f"transition must have shape (S, A, S), got {P.shape}")
        if R.shape != P.shape[:2]:
            raise ValueError(f"reward shape {R.shape} does not match transition {P.shape[:2]}")
        if P.shape[0] < 1 or P.shape[1] < 1:
            raise ValueError("need at least one state and one action")
        if np.any(P < 0) or np.any(P > 1):
            raise ValueError("transition probabilities must lie in [0, 1]")
        if np.max(np.abs(P.sum(axis=2) - 1.0)) > ROW_SUM_TOL:
            raise ValueError("transition rows must sum to 1")
        if not np.all(np.isfinite(R)):
            raise ValueError("rewards must be finite")
        if not 0.0 <= self.discount < 1.0:
            raise ValueError(f"discount must lie in [0, 1), got {self.discount}")
        if not 0 <= self.start_state < self.n_states:
            raise ValueError(f"start_state {self.start_state} out of range")
        for t in self.terminal_states:
            if not 0 <= t < self.n_states:
                raise ValueError(f"terminal state {t} out of range")
            if not np.allclose(P[t, :, t], 1.0) or np.any(R[t] != 0.0):
                raise ValueError(f"terminal state {t} must self-loop with reward 0")

    @property
    def n_states(self) -> int:
        return self.transition.shape[0]

    @property
    def n_actions(self) -> int:
        return self.transition.shape[1]

    @cached_property
    def _cdf(self) -> np.ndarray:
        cdf = np.cumsum(self.transition, axis=2)
        cdf[..., -1] = 1.0
        return cdf

    @cached_property
    def _terminal_mask(self) -> np.ndarray:
        mask = np.zeros(self.n_states, dtype=bool)
        mask[list(self.terminal_states)] = True
        return mask

    def is_terminal(self, s: int) -> bool:
        return bool(self._terminal_mask[s])

    def policy_kernel(self, policy: Sequence[int] | np.ndarray) -> np.ndarray:
        """State-to-state kernel P^pi for a deterministic map or an (S, A) stochastic policy."""
        pi = np.asarray(policy)
        if pi.ndim == 1:
            return self.transition[np.arange(self.n_states), pi.astype(int)]
        return np.einsum("sa,sat->st", pi, self.transition)


class StepOutcome(NamedTuple):
    next_state: int
    reward: float
    done: bool


def step(mdp: TabularMdp, s: int, a: int, rng: Any) -> StepOutcome:
    """Sample one transition from ``(s, a)``, consuming a single ``rng.random()`` draw."""
    if not 0 <= s < mdp.n_states:
        raise ValueError(f"state {s} out of range [0, {mdp.n_states})")
    if not 0 <= a < mdp.n_actions:
        raise ValueError(f"action {a} out of range [0, {mdp.n_actions})")
    u = rng.random()
    nxt = int(np.searchsorted(mdp._cdf[s, a], u, side="right"))
    return StepOutcome(nxt, float(mdp.reward[s, a]), mdp.is_terminal(nxt))


def make_sparse_grid(
    width: int = 8,
    height: int = 8,
    start: tuple[int, int] = (0, 0),
    goal: tuple[int, int] | None = None,
    slip: float = 0.0,
    discount: float = 0.99,
) -> TabularMdp:
    """Open grid with a single rewarded goal cell.

    Cells are indexed ``y * width + x``; actions are N/E/S/W and moving off
    the grid leaves the agent in place. With probability ``slip`` the move is
    redirected uniformly at random. The goal is terminal and the only reward
    is for entering it, so ``reward[s, a]`` equals the probability that
    ``(s, a)`` lands on the goal.
    """
    if width < 1 or height < 1 or width * height < 2:
        raise ValueError(f"degenerate grid {width}x{height}")
    if not 0.0 <= slip < 1.0:
        raise ValueError(f"slip must lie in [0, 1), got {slip}")
    if goal is None:
        goal = (width - 1, height - 1)
    start, goal = tuple(start), tuple(goal)
    for name, (x, y) in (("start", start), ("goal", goal)):
        if not (0 <= x < width and 0 <= y < height):
            raise ValueError(f"{name} cell {(x, y)} outside {width}x{height} grid")
    if start == goal:
        raise ValueError("start and goal must differ")

    n = width * height
    goal_idx = goal[1] * width + goal[0]
    P = np.zeros((n, 4, n))
    for s in range(n):
        if s == goal_idx:
            P[s, :, s] = 1.0
            continue
        x, y = s % width, s // width
        landing = []
        for d in range(4):
            dx, dy = _MOVES[d]
            nx, ny = x + dx, y + dy
            if not (0 <= nx < width and 0 <= ny < height):
                nx, ny = x, y
            landing.append(ny * width + nx)
        for a in range(4):
            P[s, a, landing[a]] += 1.0 - slip
            for d in range(4):
                P[s, a, landing[d]] += slip / 4.0
    R = P[:, :, goal_idx].copy()
    R[goal_idx] = 0.0
    return TabularMdp(P, R, discount, start_state=start[1] * width + start[0],
                      terminal_states=frozenset({goal_idx}))


def make_chain(n: int = 5, small_reward: float = 0.005, big_reward: float = 1.0,
               discount: float = 0.95) -> TabularMdp:
    """RiverSwim-style chain; action 0 swims left, action 1 fights the current."""
    if n < 3:
        raise ValueError(f"chain needs n >= 3, got {n}")
    P = np.zeros((n, 2, n))
    R = np.zeros((n, 2))
    for s in range(n):
        P[s, LEFT, max(s - 1, 0)] = 1.0
        P[s, RIGHT, min(s + 1, n - 1)] += 0.6
        P[s, RIGHT, s] += 0.3
        P[s, RIGHT, max(s - 1, 0)] += 0.1
    R[0, LEFT] = small_reward
    R[n - 1, RIGHT] = big_reward
    return TabularMdp(P, R, discount, start_state=0)


def make_random_mdp(n_states: int, n_actions: int, reward_sparsity: float = 0.0,
                    seed: int = 0, discount: float = 0.9) -> TabularMdp:
    """Random MDP with flat-Dirichlet transition rows, reproducible per seed."""
    if n_states < 1 or n_actions < 1:
        raise ValueError("need n_states >= 1 and n_actions >= 1")
    if not 0.0 <= reward_sparsity <= 1.0:
        raise ValueError(f"reward_sparsity must lie in [0, 1], got {reward_sparsity}")
    rng = np.random.default_rng(seed)
    P = rng.dirichlet(np.ones(n_states), size=(n_states, n_actions))
    P /= P.sum(axis=2, keepdims=True)
    R = rng.uniform(0.0, 1.0, size=(n_states, n_actions))
    n_zero = int(round(reward_sparsity * R.size))
    if n_zero:
        R.flat[rng.permutation(R.size)[:n_zero]] = 0.0
    return TabularMdp(P, R, discount)


_BUILDERS = {
    "grid": make_sparse_grid,
    "chain": make_chain,
    "random": make_random_mdp,
}


def make_env(spec: Mapping[str, Any]) -> TabularMdp:
    """Build an environment from a config mapping such as ``{"name": "grid", "width": 8}``."""
    params = dict(spec)
    name = params.pop("name", None)
    if name not in _BUILDERS:
        raise ValueError(f"unknown environment {name!r}; expected one of {sorted(_BUILDERS)}")
    if name == "grid":
        for key in ("start", "goal"):
            if params.get(key) is not None:
                params[key] = tuple(params[key])
    try:
        return _BUILDERS[name](**params)
    except TypeError as exc:
        raise ValueError(f"bad parameters for environment {name!r}: {exc}") from None
