"""Fairness-aware stochastic bandit simulations.

A two-phase index policy (adaptive uniform exploration, then UCB) for
minimizing Nash and p-mean regret under sub-Gaussian rewards, with NCB and
explore-then-UCB baselines, a reproducible Monte-Carlo sweep harness, and an
empirical verification suite for the supporting concentration lemmas.
"""

from .harness import (
    ExperimentConfig,
    RegretRow,
    RegretTable,
    RunTrajectory,
    estimate_round_means,
    read_table,
    run_batch,
    run_single,
    run_stream,
    sweep,
    write_table,
)
from .policies import (
    EXPLORE_THEN_UCB,
    NCB,
    PLAIN_UCB,
    WELFARIST_UCB,
    PolicyKind,
    PolicyState,
    confidence_width,
    explore_then_ucb_select,
    init_state,
    ncb_select,
    normalize_fairness,
    phase1_should_terminate,
    select,
    ucb_select,
    update,
    welfarist_select,
)
from .rewards import (
    BanditInstance,
    InstanceSpec,
    RewardDistribution,
    make_instance,
    sample_reward,
    sub_gaussian_proxy,
)
from .rng import RngStream
from .welfare import WelfareValue, nash_welfare, p_mean_welfare, regret

__version__ = "0.1.0"

__all__ = [
    "BanditInstance",
    "ExperimentConfig",
    "InstanceSpec",
    "PolicyKind",
    "PolicyState",
    "RegretRow",
    "RegretTable",
    "RewardDistribution",
    "RngStream",
    "RunTrajectory",
    "WelfareValue",
    "WELFARIST_UCB",
    "PLAIN_UCB",
    "NCB",
    "EXPLORE_THEN_UCB",
    "confidence_width",
    "estimate_round_means",
    "explore_then_ucb_select",
    "init_state",
    "make_instance",
    "nash_welfare",
    "ncb_select",
    "normalize_fairness",
    "p_mean_welfare",
    "phase1_should_terminate",
    "read_table",
    "regret",
    "run_batch",
    "run_single",
    "run_stream",
    "sample_reward",
    "select",
    "sub_gaussian_proxy",
    "sweep",
    "ucb_select",
    "update",
    "welfarist_select",
    "write_table",
]
