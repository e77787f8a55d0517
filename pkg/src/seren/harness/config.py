"""Experiment configuration, loaded from and saved to JSON."""
from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

MODES = ("seren", "egreedy", "seren-degenerate")
UNCERTAINTIES = ("ensemble", "count")
SCHEDULES = ("constant", "visits")


class ConfigError(ValueError):
    pass


def _default_env() -> dict[str, Any]:
    return {"name": "grid", "width": 8, "height": 8, "start": [0, 0], "goal": [7, 7], "slip": 0.0}


@dataclass
class ExperimentConfig:
    env: dict[str, Any] = field(default_factory=_default_env)
    seed: int = 0
    n_episodes: int = 150
    # None means 4 * n_states
    horizon: int | None = None
    mode: str = "seren"
    uncertainty: str = "ensemble"
    epsilon: float = 0.1

    exploiter_discount: float = 0.99
    explorer_discount: float = 0.05
    # None means the explorer discount
    switch_discount: float | None = None
    ensemble_size: int = 5
    beta: float = 10.0
    mask_fraction: float = 0.8
    q_init_scale: float = 1.0

    exploiter_lr: float = 0.1
    explorer_lr: float = 0.1
    switch_lr: float = 0.1
    lr_schedule: str = "constant"

    buffer_capacity: int = 200_000
    batch_size: int = 256
    train_freq_exploiter: int = 8
    train_freq_explorer_switcher: int = 4
    warmup_steps: int = 500

    name: str | None = None

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        def need(cond: bool, msg: str) -> None:
            if not cond:
                raise ConfigError(msg)

        need(isinstance(self.env, dict) and "name" in self.env, "env must be a mapping with a 'name'")
        need(self.mode in MODES, f"mode must be one of {MODES}")
        need(self.uncertainty in UNCERTAINTIES, f"uncertainty must be one of {UNCERTAINTIES}")
        need(self.lr_schedule in SCHEDULES, f"lr_schedule must be one of {SCHEDULES}")
        need(self.n_episodes >= 1, "n_episodes must be >= 1")
        need(self.horizon is None or self.horizon >= 1, "horizon must be >= 1")
        need(0.0 <= self.epsilon <= 1.0, "epsilon must lie in [0, 1]")
        for key in ("exploiter_discount", "explorer_discount"):
            need(0.0 <= getattr(self, key) < 1.0, f"{key} must lie in [0, 1)")
        need(self.switch_discount is None or 0.0 <= self.switch_discount < 1.0,
             "switch_discount must lie in [0, 1)")
        need(self.ensemble_size >= 2, "ensemble_size must be >= 2")
        need(self.beta >= 0, "beta must be non-negative")
        need(0.0 < self.mask_fraction <= 1.0, "mask_fraction must lie in (0, 1]")
        need(self.q_init_scale >= 0, "q_init_scale must be non-negative")
        for key in ("exploiter_lr", "explorer_lr", "switch_lr"):
            need(getattr(self, key) >= 0, f"{key} must be non-negative")
        need(self.buffer_capacity >= 1, "buffer_capacity must be >= 1")
        need(1 <= self.batch_size <= self.buffer_capacity, "batch_size must lie in [1, buffer_capacity]")
        need(self.train_freq_exploiter >= 1 and self.train_freq_explorer_switcher >= 1,
             "training frequencies must be >= 1")
        need(self.warmup_steps >= 0, "warmup_steps must be non-negative")

    @property
    def gamma_switch(self) -> float:
        return self.explorer_discount if self.switch_discount is None else self.switch_discount

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ExperimentConfig:
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    def replace(self, **changes: Any) -> ExperimentConfig:
        return dataclasses.replace(self, **changes)

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def load_config(path: str | Path) -> ExperimentConfig:
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    return ExperimentConfig.from_dict(data)


def load_config_list(path: str | Path) -> list[ExperimentConfig]:
    """A JSON list of config objects, or ``{"base": {...}, "runs": [{...}, ...]}`` overlays."""
    with open(path) as fh:
        data = json.load(fh)
    if isinstance(data, dict) and "runs" in data:
        base = data.get("base", {})
        data = [{**base, **run} for run in data["runs"]]
    if not isinstance(data, list) or not data:
        raise ConfigError(f"{path}: expected a non-empty list of configs")
    return [ExperimentConfig.from_dict(item) for item in data]
