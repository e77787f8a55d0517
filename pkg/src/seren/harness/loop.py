"""Training loops: SEREN, its degenerate epsilon-greedy form, and the epsilon-greedy baseline.

Randomness comes from three streams spawned from the run seed: one for the
critic initialisation, one for behaviour (switch coin, uniform actions,
environment transitions) and one for learning (batch indices and ensemble
masks). Within the behaviour stream each step draws, in order:

1. the switch / epsilon coin (degenerate SEREN and the baseline only),
2. one uniform action, only if that coin said explore or during warmup,
3. one environment transition.

Both the degenerate SEREN loop and the baseline follow this order and the
same training schedule, so with the same seed they must produce identical
trajectories and identical Exploiter tables.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..agents import ExploiterAgent, ExplorerAgent, StepSize, SwitchPolicy, Transition, compute_rewards
from ..mdp_env import TabularMdp, make_env, step
from ..uncertainty import CountBonus, EnsembleQ, EnsembleVariance, VisitCounts
from .buffer import ReplayBuffer
from .config import ConfigError, ExperimentConfig
from .metrics import EpisodeRow, MetricsLog


@dataclass
class _Setup:
    mdp: TabularMdp
    horizon: int
    exploiter: ExploiterAgent
    measure: object
    counts: VisitCounts | None
    buffer: ReplayBuffer
    rng: np.random.Generator
    learn_rng: np.random.Generator


def _setup(config: ExperimentConfig) -> _Setup:
    mdp = make_env(config.env)
    if config.seed < 0:
        raise ConfigError("seed must be non-negative")
    init_ss, behave_ss, learn_ss = np.random.SeedSequence(config.seed).spawn(3)
    critic = EnsembleQ.random(config.ensemble_size, mdp.n_states, mdp.n_actions,
                              config.q_init_scale, np.random.default_rng(init_ss))
    exploiter = ExploiterAgent(critic, discount=config.exploiter_discount,
                               step_size=StepSize(config.exploiter_lr, config.lr_schedule),
                               mask_fraction=config.mask_fraction)
    counts = None
    if config.uncertainty == "count":
        counts = VisitCounts(mdp.n_states, mdp.n_actions)
        measure = CountBonus(counts)
    else:
        measure = EnsembleVariance(critic)
    return _Setup(
        mdp=mdp,
        horizon=config.horizon or 4 * mdp.n_states,
        exploiter=exploiter,
        measure=measure,
        counts=counts,
        buffer=ReplayBuffer(config.buffer_capacity),
        rng=np.random.default_rng(behave_ss),
        learn_rng=np.random.default_rng(learn_ss),
    )


def _final_tables(su: _Setup, explorer=None, switcher=None) -> dict:
    tables = {
        "exploiter_members": su.exploiter.critic.members.copy(),
        "exploiter_q_mean": su.exploiter.q_mean(),
        "uncertainty": su.measure.table().copy(),
    }
    if explorer is not None:
        tables["explorer_q"] = explorer.q_xplr.copy()
    if switcher is not None:
        tables["switch_q"] = switcher.q_switch.copy()
        tables["switch_map"] = switcher.greedy_map()
    if su.counts is not None:
        tables["visit_counts"] = su.counts.counts.copy()
    return tables


def _seren_loop(config: ExperimentConfig, degenerate: bool, record_trajectory: bool) -> MetricsLog:
    su = _setup(config)
    mdp, rng, buffer, exploiter = su.mdp, su.rng, su.buffer, su.exploiter
    n_actions = mdp.n_actions
    beta = 0.0 if degenerate else config.beta
    gamma_switch = config.gamma_switch

    explorer = ExplorerAgent.zeros(mdp.n_states, n_actions, discount=config.explorer_discount,
                                   step_size=StepSize(config.explorer_lr, config.lr_schedule), beta=beta)
    switcher = SwitchPolicy.zeros(mdp.n_states, beta=beta, discount=gamma_switch,
                                  step_size=StepSize(config.switch_lr, config.lr_schedule))

    log = MetricsLog(config.config_hash(), config.seed, trajectory=[] if record_trajectory else None)
    total = 0
    for episode in range(1, config.n_episodes + 1):
        s = mdp.start_state
        switcher.reset_episode()
        ret, n_int, unc_sum, success, t = 0.0, 0, 0.0, False, 0
        for t in range(su.horizon):
            if total < config.warmup_steps:
                g, a = 0, int(rng.integers(n_actions))
            elif degenerate:
                g = int(rng.random() < config.epsilon)
                a = int(rng.integers(n_actions)) if g else exploiter.act(s)
            else:
                g = switcher.decide(s, step=t)
                a = explorer.act(s) if g else exploiter.act(s)

            L = su.measure.value(s, a)
            out = step(mdp, s, a, rng)
            r_exploit, r_xplr = compute_rewards(s, a, g, out.reward, L, beta)
            buffer.add(Transition(s, a, out.next_state, r_exploit, r_xplr, g, out.done))
            if su.counts is not None:
                su.counts.record(s, a)
            if log.trajectory is not None:
                log.trajectory.append((s, a, out.next_state, out.reward))

            ret += out.reward
            n_int += g
            unc_sum += L
            total += 1

            if total > config.warmup_steps:
                k = total - config.warmup_steps
                due_switch = not degenerate and k % config.train_freq_explorer_switcher == 0
                due_exploit = k % config.train_freq_exploiter == 0
                if due_switch or due_exploit:
                    batch = buffer.sample(config.batch_size, su.learn_rng)
                    if due_switch:
                        switcher.update(batch)
                        explorer.update(batch)
                    if due_exploit:
                        exploiter.update(batch, su.learn_rng)

            if out.done:
                success = out.reward > 0
                break
            s = out.next_state
        steps = t + 1
        log.append(EpisodeRow(episode, ret, steps, n_int, unc_sum / steps, success))

    log.final_tables = _final_tables(su, explorer, None if degenerate else switcher)
    log.final_tables["buffer_interventions"] = buffer.interventions
    return log


def run_seren(config: ExperimentConfig, record_trajectory: bool = False) -> MetricsLog:
    """Run the SEREN training loop (Exploiter, Explorer and Switcher) for one config."""
    if config.mode != "seren":
        raise ConfigError(f"run_seren needs mode 'seren', got {config.mode!r}")
    return _seren_loop(config, degenerate=False, record_trajectory=record_trajectory)


def run_seren_degenerate(config: ExperimentConfig, record_trajectory: bool = False) -> MetricsLog:
    """SEREN with a Bernoulli(epsilon) switch, a uniform explorer and no switch cost."""
    if config.mode != "seren-degenerate":
        raise ConfigError(f"run_seren_degenerate needs mode 'seren-degenerate', got {config.mode!r}")
    return _seren_loop(config, degenerate=True, record_trajectory=record_trajectory)


def run_baseline_egreedy(config: ExperimentConfig, record_trajectory: bool = False) -> MetricsLog:
    """Epsilon-greedy over the same ensemble Q-learner; 'interventions' counts exploratory draws."""
    if config.mode != "egreedy":
        raise ConfigError(f"run_baseline_egreedy needs mode 'egreedy', got {config.mode!r}")
    su = _setup(config)
    mdp, rng, buffer, exploiter = su.mdp, su.rng, su.buffer, su.exploiter
    n_actions = mdp.n_actions

    log = MetricsLog(config.config_hash(), config.seed, trajectory=[] if record_trajectory else None)
    total = 0
    for episode in range(1, config.n_episodes + 1):
        s = mdp.start_state
        ret, n_explore, unc_sum, success, t = 0.0, 0, 0.0, False, 0
        for t in range(su.horizon):
            if total < config.warmup_steps:
                explore, a = 0, int(rng.integers(n_actions))
            else:
                explore = int(rng.random() < config.epsilon)
                a = int(rng.integers(n_actions)) if explore else exploiter.act(s)

            L = su.measure.value(s, a)
            out = step(mdp, s, a, rng)
            buffer.add(Transition(s, a, out.next_state, out.reward, -L, explore, out.done))
            if su.counts is not None:
                su.counts.record(s, a)
            if log.trajectory is not None:
                log.trajectory.append((s, a, out.next_state, out.reward))

            ret += out.reward
            n_explore += explore
            unc_sum += L
            total += 1

            if total > config.warmup_steps and (total - config.warmup_steps) % config.train_freq_exploiter == 0:
                exploiter.update(buffer.sample(config.batch_size, su.learn_rng), su.learn_rng)

            if out.done:
                success = out.reward > 0
                break
            s = out.next_state
        steps = t + 1
        log.append(EpisodeRow(episode, ret, steps, n_explore, unc_sum / steps, success))

    log.final_tables = _final_tables(su)
    log.final_tables["buffer_interventions"] = buffer.interventions
    return log


def run_experiment(config: ExperimentConfig, record_trajectory: bool = False) -> MetricsLog:
    runner = {"seren": run_seren, "egreedy": run_baseline_egreedy,
              "seren-degenerate": run_seren_degenerate}[config.mode]
    return runner(config, record_trajectory=record_trajectory)


def run_degenerate_equivalence(config: ExperimentConfig) -> bool:
    """True iff degenerate SEREN and the epsilon-greedy baseline coincide exactly for this seed."""
    if config.mode != "seren-degenerate":
        raise ConfigError(f"equivalence check needs mode 'seren-degenerate', got {config.mode!r}")
    seren_log = run_seren_degenerate(config, record_trajectory=True)
    base_log = run_baseline_egreedy(config.replace(mode="egreedy"), record_trajectory=True)
    return (seren_log.trajectory == base_log.trajectory
            and np.array_equal(seren_log.final_tables["exploiter_members"],
                               base_log.final_tables["exploiter_members"]))
