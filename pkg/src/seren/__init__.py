"""Tabular SEREN: an Exploiter, an uncertainty-driven Explorer and an impulse-control Switcher,
with exact dynamic-programming and linear-approximation oracles."""

from .agents import (
    Batch,
    ExploiterAgent,
    ExplorerAgent,
    StepSize,
    SwitchPolicy,
    Transition,
    compute_rewards,
)
from .dp_oracle import (
    DpSolution,
    SwitchingProblem,
    contraction_check,
    intervention_operator,
    solve_mdp_q,
    switcher_bellman,
    value_iteration,
)
from .linear_fa import (
    FeatureBasis,
    ProjectedSolution,
    project,
    projected_fixed_point,
    stationary_weighting,
)
from .mdp_env import StepOutcome, TabularMdp, make_chain, make_env, make_random_mdp, make_sparse_grid, step
from .uncertainty import (
    CountBonus,
    EnsembleQ,
    EnsembleVariance,
    FrozenUncertainty,
    VisitCounts,
    count_bonus,
    ensemble_mean,
    ensemble_variance,
    freeze,
)

__version__ = "0.1.0"
