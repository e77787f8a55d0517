from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Any, NamedTuple

import numpy as np

CSV_HEADER = ("episode", "return", "steps", "interventions", "mean_uncertainty", "success")


class EpisodeRow(NamedTuple):
    episode: int
    ret: float
    steps: int
    interventions: int
    mean_uncertainty: float
    success: bool

    def csv_fields(self) -> list[str]:
        return [str(self.episode), repr(float(self.ret)), str(self.steps), str(self.interventions),
                repr(float(self.mean_uncertainty)), str(int(self.success))]


@dataclass
class MetricsLog:
    """Per-episode metrics for one run, plus run metadata and the final learned tables."""

    config_hash: str
    seed: int
    rows: list[EpisodeRow] = field(default_factory=list)
    final_tables: dict[str, Any] = field(default_factory=dict, repr=False)
    trajectory: list[tuple[int, int, int, float]] | None = field(default=None, repr=False)

    def append(self, row: EpisodeRow) -> None:
        if row.episode != len(self.rows) + 1:
            raise ValueError(f"expected episode {len(self.rows) + 1}, got {row.episode}")
        if row.interventions > row.steps:
            raise ValueError("interventions cannot exceed steps")
        self.rows.append(row)

    def column(self, name: str) -> np.ndarray:
        attr = "ret" if name == "return" else name
        return np.array([getattr(row, attr) for row in self.rows], dtype=float)

    def success_rate(self, last: int | None = None) -> float:
        rows = self.rows if last is None else self.rows[-last:]
        return float(np.mean([r.success for r in rows]))

    def intervention_rate(self, episodes: slice) -> float:
        """Mean per-episode interventions / steps over a slice of episodes."""
        rows = self.rows[episodes]
        return float(np.mean([r.interventions / r.steps for r in rows]))

    @property
    def total_interventions(self) -> int:
        return sum(r.interventions for r in self.rows)

    def csv_rows(self) -> list[list[str]]:
        return [row.csv_fields() for row in self.rows]

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write(",".join(CSV_HEADER) + "\n")
        for fields in self.csv_rows():
            out.write(",".join(fields) + "\n")
        return out.getvalue()
