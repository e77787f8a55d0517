"""Epistemic-uncertainty measures L(s, a).

Two live measures are provided, both non-negative:

* :class:`EnsembleVariance` - unbiased sample variance across the members of
  an :class:`EnsembleQ` critic;
* :class:`CountBonus` - ``1 / sqrt(1 + n(s, a))`` over a :class:`VisitCounts`
  table.

:func:`freeze` takes an immutable snapshot of either, which is what the
dynamic-programming oracle and the fixed-L convergence checks consume.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class EnsembleQ:
    """``E`` Q-tables of identical shape, stored as one ``(E, S, A)`` array."""

    def __init__(self, members: np.ndarray):
        members = np.array(members, dtype=float)
        if members.ndim != 3:
            raise ValueError(f"members must have shape (E, S, A), got {members.shape}")
        if members.shape[0] < 2:
            raise ValueError("an ensemble needs at least two members")
        self.members = members

    @classmethod
    def zeros(cls, n_members: int, n_states: int, n_actions: int) -> EnsembleQ:
        return cls(np.zeros((n_members, n_states, n_actions)))

    @classmethod
    def random(cls, n_members: int, n_states: int, n_actions: int, scale: float,
               rng: np.random.Generator) -> EnsembleQ:
        """Members drawn independently from ``Uniform[0, scale)``."""
        return cls(rng.uniform(0.0, scale, size=(n_members, n_states, n_actions)))

    @property
    def member_count(self) -> int:
        return self.members.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.members.shape[1:]

    def mean_table(self) -> np.ndarray:
        return self.members.mean(axis=0)

    def variance_table(self) -> np.ndarray:
        return self.members.var(axis=0, ddof=1)


def ensemble_mean(q: EnsembleQ, s: int, a: int) -> float:
    return float(q.members[:, s, a].mean())


def ensemble_variance(q: EnsembleQ, s: int, a: int) -> float:
    return float(q.members[:, s, a].var(ddof=1))


class VisitCounts:
    def __init__(self, n_states: int, n_actions: int):
        self.counts = np.zeros((n_states, n_actions), dtype=np.int64)

    def record(self, s: int, a: int) -> None:
        self.counts[s, a] += 1


def count_bonus(v: VisitCounts, s: int, a: int) -> float:
    return float(1.0 / np.sqrt(1.0 + v.counts[s, a]))


class EnsembleVariance:
    name = "ensemble"

    def __init__(self, ensemble: EnsembleQ):
        self.ensemble = ensemble

    def value(self, s: int, a: int) -> float:
        return ensemble_variance(self.ensemble, s, a)

    def table(self) -> np.ndarray:
        return self.ensemble.variance_table()


class CountBonus:
    name = "count"

    def __init__(self, counts: VisitCounts):
        self.counts = counts

    def value(self, s: int, a: int) -> float:
        return count_bonus(self.counts, s, a)

    def table(self) -> np.ndarray:
        return 1.0 / np.sqrt(1.0 + self.counts.counts)


@dataclass(frozen=True, eq=False)
class FrozenUncertainty:
    """Read-only snapshot of an uncertainty table."""

    L: np.ndarray

    def __post_init__(self) -> None:
        table = np.array(self.L, dtype=float, copy=True)
        if np.any(table < 0) or not np.all(np.isfinite(table)):
            raise ValueError("uncertainty must be finite and non-negative")
        table.setflags(write=False)
        object.__setattr__(self, "L", table)

    def value(self, s: int, a: int) -> float:
        return float(self.L[s, a])

    def table(self) -> np.ndarray:
        return self.L


def freeze(measure) -> FrozenUncertainty:
    """Snapshot ``measure`` (any object with ``table()``, or a raw array)."""
    table = measure.table() if hasattr(measure, "table") else measure
    return FrozenUncertainty(table)
