"""Exact dynamic programming for the Switcher's impulse-control problem.

For fixed Exploiter and Explorer policies and a frozen uncertainty table L,
the Switcher faces an optimal-switching problem on the state space:

    M v(s) = -L(s, x(s)) - beta + gamma * P(. | s, x(s)) . v      (intervene)
    C v(s) = -L(s, e(s))        + gamma * P(. | s, e(s)) . v      (continue)
    T v    = max(M v, C v)

where ``e`` and ``x`` are the Exploiter's and Explorer's deterministic
policies. ``T`` is a gamma-contraction in the sup norm, so value iteration
from zero converges to the unique fixed point V*, and the optimal switching
map intervenes exactly where ``M V* >= C V*``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .mdp_env import TabularMdp, make_random_mdp

MAX_ITERATIONS = 1_000_000


@dataclass(frozen=True, eq=False)
class SwitchingProblem:
    """The Switcher's problem for a fixed pair of policies and a frozen L.

    ``continue_mode="max"`` replaces the continue branch by the maximum over
    all actions, which is the literal textbook operator; the default
    evaluates the fixed Exploiter action.
    """

    mdp: TabularMdp
    exploiter_policy: np.ndarray
    explorer_policy: np.ndarray
    L: np.ndarray
    beta: float
    discount: float | None = None
    continue_mode: str = "exploiter"

    def __post_init__(self) -> None:
        S, A = self.mdp.n_states, self.mdp.n_actions
        for name in ("exploiter_policy", "explorer_policy"):
            pol = np.array(getattr(self, name), dtype=np.int64)
            if pol.shape != (S,) or np.any(pol < 0) or np.any(pol >= A):
                raise ValueError(f"{name} must map each of {S} states to an action in [0, {A})")
            pol.setflags(write=False)
            object.__setattr__(self, name, pol)
        L = np.array(self.L, dtype=float)
        if L.shape != (S, A):
            raise ValueError(f"L must have shape {(S, A)}, got {L.shape}")
        if np.any(L < 0) or not np.all(np.isfinite(L)):
            raise ValueError("L must be finite and non-negative")
        L.setflags(write=False)
        object.__setattr__(self, "L", L)
        if self.discount is None:
            object.__setattr__(self, "discount", self.mdp.discount)
        if not 0.0 <= self.discount < 1.0:
            raise ValueError("discount must lie in [0, 1)")
        if self.beta < 0:
            raise ValueError("beta must be non-negative")
        if self.continue_mode not in ("exploiter", "max"):
            raise ValueError(f"unknown continue_mode {self.continue_mode!r}")

    @property
    def n_states(self) -> int:
        return self.mdp.n_states

    @cached_property
    def _rows(self) -> np.ndarray:
        return np.arange(self.n_states)

    @cached_property
    def intervene_kernel(self) -> np.ndarray:
        return self.mdp.policy_kernel(self.explorer_policy)

    @cached_property
    def intervene_reward(self) -> np.ndarray:
        return -self.L[self._rows, self.explorer_policy] - self.beta

    @cached_property
    def continue_kernel(self) -> np.ndarray:
        return self.mdp.policy_kernel(self.exploiter_policy)

    @cached_property
    def continue_reward(self) -> np.ndarray:
        return -self.L[self._rows, self.exploiter_policy]

    def switched_chain(self, g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Reward vector and kernel of the chain that intervenes where ``g == 1``."""
        g = np.asarray(g, dtype=bool)
        r = np.where(g, self.intervene_reward, self.continue_reward)
        P = np.where(g[:, None], self.intervene_kernel, self.continue_kernel)
        return r, P


@dataclass
class DpSolution:
    value: np.ndarray
    g_star: np.ndarray
    residual: float
    iterations: int
    history: list[np.ndarray] = field(default_factory=list, repr=False)


def intervention_operator(p: SwitchingProblem, v: np.ndarray) -> np.ndarray:
    """One backup through an intervention: ``-L - beta + gamma * P_x v``."""
    return p.intervene_reward + p.discount * (p.intervene_kernel @ v)


def continue_backup(p: SwitchingProblem, v: np.ndarray) -> np.ndarray:
    if p.continue_mode == "max":
        q = -p.L + p.discount * np.einsum("sat,t->sa", p.mdp.transition, v)
        return q.max(axis=1)
    return p.continue_reward + p.discount * (p.continue_kernel @ v)


def switcher_bellman(p: SwitchingProblem, v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return np.maximum(intervention_operator(p, v), continue_backup(p, v))


def obstacle_map(p: SwitchingProblem, v: np.ndarray) -> np.ndarray:
    """Heaviside of ``M v - C v`` with H(0) = 1."""
    return (intervention_operator(p, v) >= continue_backup(p, v)).astype(np.int64)


def value_iteration(p: SwitchingProblem, tol: float = 1e-10,
                    max_iterations: int = MAX_ITERATIONS, keep_history: bool = False) -> DpSolution:
    """Iterate ``v <- T v`` from zero until the result is within ``tol`` of V*."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    gamma = p.discount
    threshold = tol * (1.0 - gamma) / gamma if gamma > 0 else np.inf
    v = np.zeros(p.n_states)
    history = [v.copy()] if keep_history else []
    for it in range(1, max_iterations + 1):
        v_new = switcher_bellman(p, v)
        residual = float(np.max(np.abs(v_new - v)))
        v = v_new
        if keep_history:
            history.append(v.copy())
        if residual <= threshold:
            return DpSolution(v, obstacle_map(p, v), residual, it, history)
    raise RuntimeError(f"value iteration did not converge in {max_iterations} iterations")


def solve_mdp_q(mdp: TabularMdp, tol: float = 1e-10,
                max_iterations: int = MAX_ITERATIONS) -> np.ndarray:
    """Optimal action values Q* by Q-value iteration, within ``tol`` in sup norm."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    gamma = mdp.discount
    threshold = tol * (1.0 - gamma) / gamma if gamma > 0 else np.inf
    q = np.zeros((mdp.n_states, mdp.n_actions))
    for _ in range(max_iterations):
        q_new = mdp.reward + gamma * (mdp.transition @ q.max(axis=1))
        residual = np.max(np.abs(q_new - q))
        q = q_new
        if residual <= threshold:
            return q
    raise RuntimeError(f"Q-value iteration did not converge in {max_iterations} iterations")


def greedy_policy(q: np.ndarray) -> np.ndarray:
    return np.argmax(q, axis=1).astype(np.int64)


def contraction_check(p: SwitchingProblem, v1: np.ndarray, v2: np.ndarray) -> bool:
    lhs = np.max(np.abs(switcher_bellman(p, v1) - switcher_bellman(p, v2)))
    return bool(lhs <= p.discount * np.max(np.abs(np.asarray(v1) - np.asarray(v2))) + 1e-12)


def kernel_nonexpansive_check(P: np.ndarray, v1: np.ndarray, v2: np.ndarray) -> bool:
    """Sup-norm non-expansiveness of a state kernel on one pair of vectors."""
    d = np.asarray(v1) - np.asarray(v2)
    return bool(np.max(np.abs(P @ d)) <= np.max(np.abs(d)) + 1e-12)


def contraction_ratios(p: SwitchingProblem, v1: np.ndarray, v2: np.ndarray,
                       weights: np.ndarray) -> tuple[float, float]:
    """``||Tv1 - Tv2|| / ||v1 - v2||`` in the sup norm and the ``weights``-weighted L2 norm.

    Only the sup-norm ratio is guaranteed to be at most gamma.
    """
    d = np.asarray(v1) - np.asarray(v2)
    td = switcher_bellman(p, v1) - switcher_bellman(p, v2)
    sup = np.max(np.abs(td)) / np.max(np.abs(d))
    l2 = np.sqrt(np.dot(weights, td**2) / np.dot(weights, d**2))
    return float(sup), float(l2)


def random_switching_problem(seed: int, n_states: int, n_actions: int, discount: float,
                             beta: float, L_scale: float = 1.0,
                             continue_mode: str = "exploiter") -> SwitchingProblem:
    """Random MDP, random deterministic policies and ``L ~ Uniform[0, L_scale)``."""
    rng = np.random.default_rng([seed, 7919])
    mdp = make_random_mdp(n_states, n_actions, 0.0, seed, discount=discount)
    return SwitchingProblem(
        mdp,
        exploiter_policy=rng.integers(n_actions, size=n_states),
        explorer_policy=rng.integers(n_actions, size=n_states),
        L=rng.uniform(0.0, L_scale, size=(n_states, n_actions)),
        beta=beta,
        continue_mode=continue_mode,
    )
