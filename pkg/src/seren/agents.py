"""Exploiter, Explorer and Switcher learners.

All three are tabular Q-learners trained off-policy from the same replay
batches. A batch update is synchronous: targets are computed from the
tables as they stood before the batch, and an entry hit by several
transitions moves by the step size times their mean TD error.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

from .uncertainty import EnsembleQ


class Transition(NamedTuple):
    s: int
    a: int
    s_next: int
    r_exploit: float
    r_xplr: float
    g: int
    done: bool


@dataclass(frozen=True, eq=False)
class Batch:
    """Column-wise view of a sequence of transitions."""

    s: np.ndarray
    a: np.ndarray
    s_next: np.ndarray
    r_exploit: np.ndarray
    r_xplr: np.ndarray
    g: np.ndarray
    done: np.ndarray

    def __len__(self) -> int:
        return len(self.s)

    @classmethod
    def from_transitions(cls, transitions: Iterable[Transition]) -> Batch:
        rows = list(transitions)
        if not rows:
            raise ValueError("empty batch")
        cols = list(zip(*rows))
        return cls(
            s=np.asarray(cols[0], dtype=np.int64),
            a=np.asarray(cols[1], dtype=np.int64),
            s_next=np.asarray(cols[2], dtype=np.int64),
            r_exploit=np.asarray(cols[3], dtype=float),
            r_xplr=np.asarray(cols[4], dtype=float),
            g=np.asarray(cols[5], dtype=np.int64),
            done=np.asarray(cols[6], dtype=bool),
        )


def _as_batch(batch) -> Batch:
    if isinstance(batch, Batch):
        if len(batch) == 0:
            raise ValueError("empty batch")
        return batch
    return Batch.from_transitions(batch)


def compute_rewards(s: int, a: int, g: int, env_reward: float, L_cached: float,
                    beta: float) -> tuple[float, float]:
    """Exploiter and Explorer rewards for one executed step.

    The Exploiter sees the environment reward of whichever action was run;
    the Switcher/Explorer reward is ``-L - beta * g``.
    """
    if L_cached < 0:
        raise ValueError(f"uncertainty must be non-negative, got {L_cached}")
    return float(env_reward), float(-L_cached - beta * g)


@dataclass
class StepSize:
    """Constant step size, or ``c / visits`` per table entry (Robbins-Monro)."""

    rate: float = 0.1
    schedule: str = "constant"

    def __post_init__(self) -> None:
        if self.schedule not in ("constant", "visits"):
            raise ValueError(f"unknown step-size schedule {self.schedule!r}")
        if self.rate < 0:
            raise ValueError("step size must be non-negative")


def _apply_td(table: np.ndarray, keys: np.ndarray, td: np.ndarray, step: StepSize,
              visits: np.ndarray | None) -> None:
    """Move ``table.flat[k]`` by step * mean(td over transitions with key k)."""
    if keys.size == 0:
        return
    size = table.size
    hits = np.bincount(keys, minlength=size)
    total = np.bincount(keys, weights=td, minlength=size)
    touched = np.flatnonzero(hits)
    mean_td = total[touched] / hits[touched]
    if step.schedule == "constant":
        alpha = step.rate
    else:
        visits.flat[touched] += hits[touched]
        alpha = np.minimum(1.0, step.rate * hits[touched] / visits.flat[touched])
    table.flat[touched] += alpha * mean_td


def _greedy(row: np.ndarray) -> int:
    # np.argmax returns the first maximiser, i.e. ties go to the lowest index
    return int(np.argmax(row))


@dataclass(eq=False)
class ExploiterAgent:
    """Ensemble Q-learner on the environment reward; acts greedily on the ensemble mean."""

    critic: EnsembleQ
    discount: float = 0.99
    step_size: StepSize = field(default_factory=StepSize)
    mask_fraction: float = 0.8
    visits: np.ndarray | None = None

    def __post_init__(self) -> None:
        if not 0.0 < self.mask_fraction <= 1.0:
            raise ValueError("mask_fraction must lie in (0, 1]")
        if self.visits is None:
            self.visits = np.zeros(self.critic.members.shape, dtype=np.int64)

    def q_mean(self) -> np.ndarray:
        return self.critic.mean_table()

    def act(self, s: int) -> int:
        return _greedy(self.critic.members[:, s, :].mean(axis=0))

    def update(self, batch, rng: np.random.Generator) -> ExploiterAgent:
        """One masked TD pass per ensemble member; the g-flags are ignored."""
        b = _as_batch(batch)
        Q = self.critic.members
        E, S, A = Q.shape
        mask = rng.random((E, len(b))) < self.mask_fraction
        cont = self.discount * (~b.done)
        target = b.r_exploit[None, :] + cont[None, :] * Q[:, b.s_next, :].max(axis=2)
        td = target - Q[:, b.s, b.a]
        keys = np.arange(E)[:, None] * (S * A) + (b.s * A + b.a)[None, :]
        _apply_td(Q, keys[mask], td[mask], self.step_size, self.visits)
        return self


@dataclass(eq=False)
class ExplorerAgent:
    """Greedy Q-learner on the uncertainty part ``-L`` of the Explorer reward."""

    q_xplr: np.ndarray
    discount: float = 0.05
    step_size: StepSize = field(default_factory=StepSize)
    beta: float = 10.0
    visits: np.ndarray | None = None

    def __post_init__(self) -> None:
        self.q_xplr = np.array(self.q_xplr, dtype=float)
        if self.visits is None:
            self.visits = np.zeros(self.q_xplr.shape, dtype=np.int64)

    @classmethod
    def zeros(cls, n_states: int, n_actions: int, **kwargs) -> ExplorerAgent:
        return cls(np.zeros((n_states, n_actions)), **kwargs)

    def act(self, s: int) -> int:
        return _greedy(self.q_xplr[s])

    def update(self, batch) -> ExplorerAgent:
        b = _as_batch(batch)
        q = self.q_xplr
        reward = b.r_xplr + self.beta * b.g
        target = reward + self.discount * (~b.done) * q[b.s_next].max(axis=1)
        td = target - q[b.s, b.a]
        _apply_td(q, b.s * q.shape[1] + b.a, td, self.step_size, self.visits)
        return self


@dataclass(eq=False)
class SwitchPolicy:
    """Binary Q-learner over {continue, intervene} with intervention cost ``beta``.

    ``decide`` intervenes when ``q(s, 1) >= q(s, 0)``, so an untouched state
    (both entries equal) is intervened on.
    """

    q_switch: np.ndarray
    beta: float = 10.0
    discount: float = 0.05
    step_size: StepSize = field(default_factory=StepSize)
    intervention_times: list[int] = field(default_factory=list)
    visits: np.ndarray | None = None

    def __post_init__(self) -> None:
        self.q_switch = np.array(self.q_switch, dtype=float)
        if self.q_switch.ndim != 2 or self.q_switch.shape[1] != 2:
            raise ValueError("q_switch must have shape (S, 2)")
        if self.beta < 0:
            raise ValueError("intervention cost must be non-negative")
        if self.visits is None:
            self.visits = np.zeros(self.q_switch.shape, dtype=np.int64)

    @classmethod
    def zeros(cls, n_states: int, **kwargs) -> SwitchPolicy:
        return cls(np.zeros((n_states, 2)), **kwargs)

    def decide(self, s: int, step: int | None = None) -> int:
        g = int(self.q_switch[s, 1] >= self.q_switch[s, 0])
        if g and step is not None:
            if self.intervention_times and step <= self.intervention_times[-1]:
                raise ValueError("intervention times must be strictly increasing")
            self.intervention_times.append(step)
        return g

    def reset_episode(self) -> None:
        self.intervention_times = []

    def greedy_map(self) -> np.ndarray:
        return (self.q_switch[:, 1] >= self.q_switch[:, 0]).astype(np.int64)

    def value(self) -> np.ndarray:
        return self.q_switch.max(axis=1)

    def update(self, batch) -> SwitchPolicy:
        b = _as_batch(batch)
        q = self.q_switch
        target = b.r_xplr + self.discount * (~b.done) * q[b.s_next].max(axis=1)
        td = target - q[b.s, b.g]
        _apply_td(q, b.s * 2 + b.g, td, self.step_size, self.visits)
        return self
