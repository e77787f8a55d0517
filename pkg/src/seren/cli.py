"""Command-line entry point: ``seren <subcommand> [--config PATH] [--seed N] [--out DIR]``.

Exit status is 0 on success, 1 when a check fails or a sweep has failing
runs, and 2 on bad input; every failure also writes one JSON line
``{"error": ..., "message": ...}`` to stderr.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path
from typing import Any

import numpy as np

from .dp_oracle import SwitchingProblem, greedy_policy, solve_mdp_q, value_iteration
from .harness import (
    ConfigError,
    ExperimentConfig,
    load_config,
    load_config_list,
    run_baseline_egreedy,
    run_degenerate_equivalence,
    run_experiment,
)
from .harness.sweep import sweep
from .linear_fa import fa_check
from .mdp_env import make_env


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        print(json.dumps({"error": "UsageError", "message": message}), file=sys.stderr)
        sys.exit(2)


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer, np.floating)):
        return obj.item()
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    return obj


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _experiment_config(args) -> ExperimentConfig:
    config = load_config(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        config = config.replace(seed=args.seed)
    return config


def cmd_train(args) -> int:
    config = _experiment_config(args)
    if config.mode == "egreedy":
        raise UsageError("config mode is 'egreedy'; use the 'baseline' subcommand")
    log = run_experiment(config)
    out = _out_dir(args)
    (out / "metrics.csv").write_text(log.to_csv())
    tables = {"config": config.to_dict(), "config_hash": log.config_hash, **_jsonable(log.final_tables)}
    (out / "tables.json").write_text(json.dumps(tables, indent=1))
    print(json.dumps({"episodes": len(log.rows), "success_rate_last20": log.success_rate(20),
                      "interventions": log.total_interventions, "out": str(out)}))
    return 0


def cmd_baseline(args) -> int:
    config = _experiment_config(args).replace(mode="egreedy")
    log = run_baseline_egreedy(config)
    out = _out_dir(args)
    (out / "metrics.csv").write_text(log.to_csv())
    print(json.dumps({"episodes": len(log.rows), "success_rate_last20": log.success_rate(20),
                      "out": str(out)}))
    return 0


def cmd_equiv_check(args) -> int:
    config = _experiment_config(args).replace(mode="seren-degenerate")
    equal = run_degenerate_equivalence(config)
    print(json.dumps({"equal": equal, "seed": config.seed, "epsilon": config.epsilon}))
    return 0 if equal else 1


def _policy(spec: Any, q_star: np.ndarray, n_states: int, name: str) -> np.ndarray:
    if isinstance(spec, list):
        return np.asarray(spec, dtype=np.int64)
    if spec == "optimal":
        return greedy_policy(q_star)
    if isinstance(spec, str) and spec.startswith("action:"):
        return np.full(n_states, int(spec.split(":", 1)[1]), dtype=np.int64)
    raise UsageError(f"{name}: expected a list, 'optimal' or 'action:<k>', got {spec!r}")


def load_switching_problem(path: str | Path) -> tuple[SwitchingProblem, float]:
    """Read a dp-solve problem file.

    Keys: ``env`` (environment spec), ``beta``, optional ``discount``,
    ``exploiter_policy`` and ``explorer_policy`` (list, ``"optimal"`` or
    ``"action:<k>"``), ``uncertainty`` (an (S, A) table or
    ``{"scale": x, "seed": n}`` for a uniform random table), ``tol`` and
    ``continue_mode``.
    """
    with open(path) as fh:
        data = json.load(fh)
    try:
        mdp = make_env(data["env"])
        q_star = solve_mdp_q(mdp)
        S, A = mdp.n_states, mdp.n_actions
        unc = data.get("uncertainty", {"scale": 1.0, "seed": 0})
        if isinstance(unc, dict):
            L = np.random.default_rng(unc.get("seed", 0)).uniform(0.0, unc.get("scale", 1.0), (S, A))
        else:
            L = np.asarray(unc, dtype=float)
        problem = SwitchingProblem(
            mdp,
            exploiter_policy=_policy(data.get("exploiter_policy", "optimal"), q_star, S, "exploiter_policy"),
            explorer_policy=_policy(data.get("explorer_policy", "action:0"), q_star, S, "explorer_policy"),
            L=L,
            beta=float(data.get("beta", 10.0)),
            discount=data.get("discount"),
            continue_mode=data.get("continue_mode", "exploiter"),
        )
    except KeyError as exc:
        raise UsageError(f"{path}: missing key {exc}") from None
    return problem, float(data.get("tol", 1e-10))


def cmd_dp_solve(args) -> int:
    if not args.config:
        raise UsageError("dp-solve needs --config PROBLEM.json")
    problem, tol = load_switching_problem(args.config)
    sol = value_iteration(problem, tol=tol)
    result = {"V": sol.value.tolist(), "g_star": sol.g_star.tolist(),
              "iterations": sol.iterations, "residual": sol.residual}
    text = json.dumps(result)
    print(text)
    if args.out:
        (_out_dir(args) / "dp_solution.json").write_text(text + "\n")
    return 0


FA_COLUMNS = ("seed", "approx_error", "bound", "within_bound", "fixed_point_residual", "iterations")


def cmd_fa_check(args) -> int:
    params = {"n_states": 8, "n_actions": 2, "n_features": 3, "discount": 0.9, "beta": 1.0}
    n_seeds, first_seed = 20, 0
    if args.config:
        with open(args.config) as fh:
            extra = json.load(fh)
        n_seeds = int(extra.pop("seeds", n_seeds))
        first_seed = int(extra.pop("seed", first_seed))
        unknown = set(extra) - set(params)
        if unknown:
            raise UsageError(f"unknown fa-check keys: {sorted(unknown)}")
        params.update(extra)
    if args.seeds is not None:
        n_seeds = args.seeds
    if args.seed is not None:
        first_seed = args.seed

    rows, all_ok = [], True
    for seed in range(first_seed, first_seed + n_seeds):
        sol = fa_check(seed, **params)
        all_ok &= sol.within_bound
        rows.append([seed, repr(sol.approx_error), repr(sol.bound), int(sol.within_bound),
                     repr(sol.fixed_point_residual), sol.iterations])
    target = (_out_dir(args) / "fa_check.csv").open("w", newline="") if args.out else sys.stdout
    writer = csv.writer(target, lineterminator="\n")
    writer.writerow(FA_COLUMNS)
    writer.writerows(rows)
    if target is not sys.stdout:
        target.close()
    return 0 if all_ok else 1


def cmd_sweep(args) -> int:
    if not args.config:
        raise UsageError("sweep needs --config LIST.json")
    configs = load_config_list(args.config)
    if args.seed is not None:
        configs = [c.replace(seed=args.seed) for c in configs]
    result = sweep(configs, parallelism=args.parallelism)
    out = _out_dir(args)
    (out / "aggregate.csv").write_text(result.csv)
    for config_id, err in result.errors.items():
        first = err.splitlines()[0]
        print(json.dumps({"error": "run_failed", "config_id": config_id, "message": first}), file=sys.stderr)
    print(json.dumps({"configs": result.n_configs, "failed": len(result.errors),
                      "out": str(out / "aggregate.csv")}))
    return 0 if result.ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="seren", description="Tabular SEREN laboratory")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, func, help_text: str, out_default: str | None = "out"):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="path to a JSON config")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--out", default=out_default, help="output directory")
        p.set_defaults(func=func)
        return p

    add("train", cmd_train, "run SEREN; write metrics.csv and tables.json")
    add("baseline", cmd_baseline, "run the epsilon-greedy baseline; write metrics.csv")
    add("equiv-check", cmd_equiv_check, "check degenerate SEREN == epsilon-greedy", out_default=None)
    add("dp-solve", cmd_dp_solve, "solve a switching problem exactly; print JSON", out_default=None)
    fa = add("fa-check", cmd_fa_check, "projected-FA error vs bound per seed, as CSV", out_default=None)
    fa.add_argument("--seeds", type=int, help="number of random instances")
    sw = add("sweep", cmd_sweep, "run a list of configs; write aggregate.csv")
    sw.add_argument("--parallelism", type=int, default=1)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ConfigError, ValueError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 2
    except RuntimeError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
