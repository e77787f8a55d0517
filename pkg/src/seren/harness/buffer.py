from __future__ import annotations

import numpy as np

from ..agents import Batch, Transition


class ReplayBuffer:
    """Fixed-capacity ring buffer of transitions with uniform sampling."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._s = np.zeros(capacity, dtype=np.int64)
        self._a = np.zeros(capacity, dtype=np.int64)
        self._s_next = np.zeros(capacity, dtype=np.int64)
        self._r_exploit = np.zeros(capacity)
        self._r_xplr = np.zeros(capacity)
        self._g = np.zeros(capacity, dtype=np.int64)
        self._done = np.zeros(capacity, dtype=bool)
        self.inserted = 0
        self.interventions = 0

    def __len__(self) -> int:
        return min(self.inserted, self.capacity)

    def add(self, t: Transition) -> None:
        i = self.inserted % self.capacity
        self._s[i], self._a[i], self._s_next[i] = t.s, t.a, t.s_next
        self._r_exploit[i], self._r_xplr[i] = t.r_exploit, t.r_xplr
        self._g[i], self._done[i] = t.g, t.done
        self.inserted += 1
        self.interventions += int(t.g)

    def _take(self, idx: np.ndarray) -> Batch:
        return Batch(self._s[idx], self._a[idx], self._s_next[idx], self._r_exploit[idx],
                     self._r_xplr[idx], self._g[idx], self._done[idx])

    def sample(self, batch_size: int, rng: np.random.Generator) -> Batch:
        """Uniform draw with replacement over the current contents."""
        if len(self) == 0:
            raise ValueError("cannot sample from an empty buffer")
        return self._take(rng.integers(0, len(self), size=batch_size))

    def contents(self) -> Batch:
        return self._take(np.arange(len(self)))
