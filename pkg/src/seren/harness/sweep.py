"""Run many configs, optionally in worker processes, and aggregate their metrics."""
from __future__ import annotations

import io
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .config import ExperimentConfig
from .loop import run_experiment
from .metrics import CSV_HEADER


@dataclass
class SweepResult:
    csv: str
    errors: dict[str, str] = field(default_factory=dict)
    n_configs: int = 0

    @property
    def ok(self) -> bool:
        return not self.errors


def config_ids(configs: list[ExperimentConfig]) -> list[str]:
    width = max(3, len(str(len(configs) - 1)))
    ids = [cfg.name or f"cfg{i:0{width}d}" for i, cfg in enumerate(configs)]
    if len(set(ids)) != len(ids):
        raise ValueError("config names must be unique within a sweep")
    return ids


def _worker(payload: tuple[str, dict]) -> tuple[str, list[list[str]] | None, str | None]:
    config_id, data = payload
    try:
        log = run_experiment(ExperimentConfig.from_dict(data))
        return config_id, log.csv_rows(), None
    except Exception as exc:  # reported per config; the sweep carries on
        return config_id, None, f"{type(exc).__name__}: {exc}\n{traceback.format_exc(limit=3)}"


def sweep(configs: list[ExperimentConfig], parallelism: int = 1) -> SweepResult:
    """Row order is (config_id, episode) whatever the scheduling."""
    if not configs:
        raise ValueError("sweep needs at least one config")
    if parallelism < 1:
        raise ValueError("parallelism must be >= 1")
    payloads = list(zip(config_ids(configs), (c.to_dict() for c in configs)))
    if parallelism == 1:
        results = [_worker(p) for p in payloads]
    else:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            results = list(pool.map(_worker, payloads))

    out = io.StringIO()
    out.write(",".join(("config_id",) + CSV_HEADER) + "\n")
    errors = {}
    for config_id, rows, err in sorted(results, key=lambda r: r[0]):
        if err is not None:
            errors[config_id] = err
            continue
        for fields in rows:
            out.write(",".join([config_id] + fields) + "\n")
    return SweepResult(out.getvalue(), errors, len(configs))
