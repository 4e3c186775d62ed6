"""Seeded Monte-Carlo experiment execution.

A *run* plays one policy on one instance for a full horizon and records the
trajectory.  A *sweep* executes a grid of (policy, fairness order, horizon)
cells, each cell averaging many independent runs into a per-round estimate of
the expected mean reward, and reduces that estimate to a regret figure.

Two execution paths produce bit-identical trajectories:

* :func:`run_single` drives the readable per-state policy API round by round;
* :func:`run_batch` advances all runs of a cell in lock-step with vectorized
  arithmetic.

Both consume randomness through the same stream layout (one uniform variate
per round from the run's ``"rewards"`` substream; ``k`` uniforms per
exploration block from its ``"perm"`` substream), so agreement is exact, and
the batch path is what sweeps use.

Horizons are swept as fresh experiments, never as prefixes of a longer run:
the confidence widths contain ``ln T``, so the first 1e3 rounds of a T=1e4
run are a different process than a T=1e3 run.
"""

from __future__ import annotations

import csv
import json
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import ndtri

from . import policies
from .policies import PolicyKind, Phase
from .rewards import BERNOULLI, BanditInstance, InstanceSpec, _U_FLOOR
from .rng import RngStream, float_key
from .welfare import p_mean_welfare, regret

#: Number of run-batches used by the jackknife dispersion estimate.
JACKKNIFE_BATCHES = 5


@dataclass(frozen=True)
class RunTrajectory:
    """Per-round record of one run, sufficient to audit the policy's behavior.

    ``chosen[t]`` is the 0-based arm pulled at round ``t+1``; ``true_means``
    its true expected reward; ``index_phase[t]`` is True once the policy has
    switched from uniform/warmup play to index play.  ``tau`` is the length
    of the uniform stage (``None`` if the policy never switched).  When the
    run is recorded with ``audit=True``, ``snap_counts``/``snap_means`` hold
    the chosen arm's count and empirical mean *after* each update, which is
    exactly the information needed to replay concentration checks.
    """

    chosen: np.ndarray
    true_means: np.ndarray
    index_phase: np.ndarray
    tau: int | None
    final_counts: np.ndarray
    snap_counts: np.ndarray | None = None
    snap_means: np.ndarray | None = None

    @property
    def horizon(self) -> int:
        return int(self.chosen.size)

    @property
    def has_audit(self) -> bool:
        return self.snap_counts is not None and self.snap_means is not None


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a sweep needs; a pure function of this config reproduces it.

    JSON form mirrors the field names: ``{instance_spec, policy_specs,
    p_values, horizon_grid, runs, base_seed, output_path?}``.
    """

    instance_spec: InstanceSpec
    policy_specs: tuple[PolicyKind, ...]
    p_values: tuple[float, ...]
    horizon_grid: tuple[int, ...]
    runs: int
    base_seed: int
    output_path: str | None = None

    def __post_init__(self) -> None:
        if self.runs < 1:
            raise ValueError(f"runs must be at least 1, got {self.runs}")
        if not self.policy_specs:
            raise ValueError("at least one policy spec is required")
        if not self.p_values:
            raise ValueError("at least one fairness order is required")
        grid = self.horizon_grid
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("horizon_grid must be strictly ascending")
        floor = max(self.instance_spec.k, 2)
        if grid and grid[0] < floor:
            raise ValueError(f"every horizon must be at least max(k, 2) = {floor}")

    def to_json(self) -> dict:
        doc: dict = {
            "instance_spec": self.instance_spec.to_json(),
            "policy_specs": [p.to_json() for p in self.policy_specs],
            "p_values": list(self.p_values),
            "horizon_grid": list(self.horizon_grid),
            "runs": self.runs,
            "base_seed": self.base_seed,
        }
        if self.output_path is not None:
            doc["output_path"] = self.output_path
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "ExperimentConfig":
        known = {
            "instance_spec", "policy_specs", "p_values", "horizon_grid",
            "runs", "base_seed", "output_path",
        }
        extra = set(doc) - known
        if extra:
            raise ValueError(f"unknown config fields: {sorted(extra)}")
        for req in ("instance_spec", "policy_specs", "p_values", "horizon_grid", "runs", "base_seed"):
            if req not in doc:
                raise ValueError(f"config is missing field {req!r}")
        return cls(
            instance_spec=InstanceSpec.from_json(doc["instance_spec"]),
            policy_specs=tuple(PolicyKind.from_json(d) for d in doc["policy_specs"]),
            p_values=tuple(float(p) for p in doc["p_values"]),
            horizon_grid=tuple(int(h) for h in doc["horizon_grid"]),
            runs=int(doc["runs"]),
            base_seed=int(doc["base_seed"]),
            output_path=doc.get("output_path"),
        )


def _float_eq(a: float, b: float) -> bool:
    return (math.isnan(a) and math.isnan(b)) or a == b


@dataclass(frozen=True, eq=False)
class RegretRow:
    policy: str
    p: float
    horizon: int
    regret: float
    runs: int
    std_error: float
    tau_mean: float
    degenerate_runs: int

    def __eq__(self, other: object) -> bool:
        # NaN-aware equality: tau_mean is NaN when no run left the uniform
        # stage, and such rows must still round-trip as equal.
        if not isinstance(other, RegretRow):
            return NotImplemented
        return (
            self.policy == other.policy
            and _float_eq(self.p, other.p)
            and self.horizon == other.horizon
            and _float_eq(self.regret, other.regret)
            and self.runs == other.runs
            and _float_eq(self.std_error, other.std_error)
            and _float_eq(self.tau_mean, other.tau_mean)
            and self.degenerate_runs == other.degenerate_runs
        )


@dataclass(frozen=True)
class RegretTable:
    rows: tuple[RegretRow, ...]


CSV_HEADER = ("policy", "p", "horizon", "regret", "runs", "std_error", "tau_mean", "degenerate_runs")


def run_stream(base_seed: int, policy: PolicyKind, p: float, horizon: int, run_index: int) -> RngStream:
    """Root stream of one run, mixed from the cell coordinates.

    Stable across platforms and processes: the policy contributes its
    canonical JSON key, ``p`` its IEEE-754 bits.
    """
    return RngStream(base_seed).child(
        "run:" + policy.canonical_key(), float_key(p), horizon, run_index,
    )


def _reward_primitives(stream: RngStream, horizon: int) -> np.ndarray:
    """The run's per-round uniforms, pre-drawn in one call."""
    return stream.child("rewards").generator().random(horizon)


def run_single(
    policy: PolicyKind,
    instance: BanditInstance,
    horizon: int,
    p: float,
    rng: RngStream,
    audit: bool = False,
) -> RunTrajectory:
    """One full run driven through the per-state policy API.

    Deterministic in ``rng``; used directly for audits and as the reference
    the batched engine is tested against.
    """
    if horizon < max(instance.k, 2):
        raise ValueError(f"horizon must be at least max(k, 2), got {horizon}")
    state = policies.init_state(policy, instance.k, horizon, instance.sigma_proxy ** 2, p)
    u = _reward_primitives(rng, horizon)
    chosen = np.empty(horizon, dtype=np.int32)
    true_means = np.empty(horizon, dtype=np.float64)
    index_phase = np.empty(horizon, dtype=bool)
    snap_counts = np.empty(horizon, dtype=np.int64) if audit else None
    snap_means = np.empty(horizon, dtype=np.float64) if audit else None

    for t in range(1, horizon + 1):
        arm = policies.select(state, rng)
        index_phase[t - 1] = state.phase is Phase.INDEX
        dist = instance.arms[arm]
        if dist.kind == BERNOULLI:
            reward = 1.0 if u[t - 1] < dist.mean else 0.0
        else:
            reward = dist.mean + dist.std * float(ndtri(max(u[t - 1], _U_FLOOR)))
        policies.update(state, arm, reward)
        chosen[t - 1] = arm
        true_means[t - 1] = dist.mean
        if audit:
            snap_counts[t - 1] = state.counts[arm]
            snap_means[t - 1] = state.emp_means[arm]

    return RunTrajectory(
        chosen=chosen,
        true_means=true_means,
        index_phase=index_phase,
        tau=state.tau,
        final_counts=state.counts.copy(),
        snap_counts=snap_counts,
        snap_means=snap_means,
    )


def run_batch(
    policy: PolicyKind,
    instance: BanditInstance,
    horizon: int,
    p: float,
    streams: list[RngStream] | tuple[RngStream, ...],
    audit: bool = False,
) -> list[RunTrajectory]:
    """All runs of a cell advanced in lock-step; per-run results match
    :func:`run_single` bit for bit.

    Runs share no state beyond read-only instance data; their random streams
    are the independent per-run streams in ``streams``.
    """
    if horizon < max(instance.k, 2):
        raise ValueError(f"horizon must be at least max(k, 2), got {horizon}")
    R = len(streams)
    if R == 0:
        raise ValueError("run_batch needs at least one stream")
    k = instance.k
    T = horizon
    log_T = math.log(T)
    sigma_sq = instance.sigma_proxy ** 2
    p_a = policies.normalize_fairness(p)
    variant = policy.variant

    arm_means = instance.means
    arm_is_bern = np.array([a.kind == BERNOULLI for a in instance.arms])
    arm_stds = np.array([0.0 if a.std is None else a.std for a in instance.arms])
    any_bern = bool(arm_is_bern.any())
    any_gauss = bool((~arm_is_bern).any())

    u = np.stack([_reward_primitives(s, T) for s in streams])
    z = ndtri(np.maximum(u, _U_FLOOR)) if any_gauss else None

    counts = np.zeros((R, k), dtype=np.float64)
    means = np.zeros((R, k), dtype=np.float64)
    in_index = np.zeros(R, dtype=bool)
    tau = np.full(R, -1, dtype=np.int64)
    rows = np.arange(R)

    stop_scale = policies.STOP_RULE_CONSTANT * p_a ** 2 * sigma_sq * log_T

    if variant == policies.PLAIN_UCB:
        in_index[:] = True
        tau[:] = 0

    perm_gens = None
    block_perm = None
    if variant == policies.WELFARIST_UCB:
        perm_gens = [s.child("perm").generator() for s in streams]
        block_perm = np.zeros((R, k), dtype=np.int64)

    if variant == policies.EXPLORE_THEN_UCB:
        epa = (
            policy.explore_rounds_per_arm
            if policy.explore_rounds_per_arm is not None
            else policies.default_explore_rounds_per_arm(T, k)
        )
        explore_budget = k * epa
    if variant == policies.NCB:
        ncb_cap = (
            policy.ncb_prefix_rounds
            if policy.ncb_prefix_rounds is not None
            else policies.default_ncb_prefix_rounds(T, k)
        )
        ncb_c = policy.ncb_width_constant

    chosen = np.empty((R, T), dtype=np.int32)
    true_means = np.empty((R, T), dtype=np.float64)
    index_phase = np.empty((R, T), dtype=bool)
    snap_counts = np.empty((R, T), dtype=np.int64) if audit else None
    snap_means = np.empty((R, T), dtype=np.float64) if audit else None

    for t in range(1, T + 1):
        need_width = variant != policies.NCB and (t > k or variant != policies.WELFARIST_UCB)
        if need_width:
            width = policies.hoeffding_width(counts, sigma_sq, log_T)
            ucb_choice = np.argmax(means + width, axis=1)

        if variant == policies.WELFARIST_UCB:
            if t > k:
                # Stopping rule, tested before the pull for runs still exploring.
                explorable = ~in_index
                if explorable.any():
                    gap = means - width
                    clear = gap > 0.0
                    with np.errstate(divide="ignore", invalid="ignore"):
                        passed = clear & (counts > stop_scale / np.square(gap))
                    fire = passed.any(axis=1) & explorable & (counts.min(axis=1) >= 1.0)
                    if fire.any():
                        in_index |= fire
                        tau[fire] = t - 1
            uniform = ~in_index
            if uniform.any():
                pos = (t - 1) % k
                if pos == 0:
                    for r in np.flatnonzero(uniform):
                        block_perm[r] = np.argsort(perm_gens[r].random(k))
                if t <= k:
                    choice = block_perm[:, pos].copy()
                else:
                    choice = ucb_choice
                    choice[uniform] = block_perm[uniform, pos]
            else:
                choice = ucb_choice
        elif variant == policies.PLAIN_UCB:
            choice = ucb_choice
        elif variant == policies.EXPLORE_THEN_UCB:
            if t <= explore_budget:
                choice = np.full(R, (t - 1) % k, dtype=np.int64)
            else:
                if not in_index.any():
                    in_index[:] = True
                    tau[:] = explore_budget
                choice = ucb_choice
        else:  # NCB
            active = ~in_index
            if active.any() and t > k:
                sums = means * counts
                done = active & ((t > ncb_cap) | (sums >= 1.0).all(axis=1))
                if done.any():
                    in_index |= done
                    tau[done] = t - 1
                    active = ~in_index
            if t <= k:
                choice = np.full(R, (t - 1) % k, dtype=np.int64)
            else:
                ncb_width = ncb_c * np.sqrt(np.maximum(means, 0.0) * log_T / counts)
                choice = np.argmax(means + ncb_width, axis=1)
                if active.any():
                    choice[active] = (t - 1) % k

        mu_c = arm_means[choice]
        if any_bern and any_gauss:
            reward = np.where(
                arm_is_bern[choice],
                (u[:, t - 1] < mu_c) * 1.0,
                mu_c + arm_stds[choice] * z[:, t - 1],
            )
        elif any_bern:
            reward = (u[:, t - 1] < mu_c) * 1.0
        else:
            reward = mu_c + arm_stds[choice] * z[:, t - 1]

        n_old = counts[rows, choice]
        n_new = n_old + 1.0
        means[rows, choice] = ((n_new - 1.0) * means[rows, choice] + reward) / n_new
        counts[rows, choice] = n_new

        chosen[:, t - 1] = choice
        true_means[:, t - 1] = mu_c
        index_phase[:, t - 1] = in_index
        if audit:
            snap_counts[:, t - 1] = n_new.astype(np.int64)
            snap_means[:, t - 1] = means[rows, choice]

    final_counts = counts.astype(np.int64)
    return [
        RunTrajectory(
            chosen=chosen[r],
            true_means=true_means[r],
            index_phase=index_phase[r],
            tau=int(tau[r]) if tau[r] >= 0 else None,
            final_counts=final_counts[r],
            snap_counts=snap_counts[r] if audit else None,
            snap_means=snap_means[r] if audit else None,
        )
        for r in range(R)
    ]


def estimate_round_means(trajectories: list[RunTrajectory]) -> np.ndarray:
    """Per-round average of the true means of the chosen arms across runs."""
    if not trajectories:
        raise ValueError("estimate_round_means needs at least one trajectory")
    horizons = {t.horizon for t in trajectories}
    if len(horizons) != 1:
        raise ValueError(f"trajectories disagree on horizon: {sorted(horizons)}")
    return np.mean(np.stack([t.true_means for t in trajectories]), axis=0)


def _jackknife_std_error(true_means: np.ndarray, mu_star: float, p: float) -> float:
    """Dispersion of the regret estimate via a delete-one-batch jackknife.

    The regret is a nonlinear functional of run-averaged means, so per-run
    regrets would be biased; batching run indices into
    :data:`JACKKNIFE_BATCHES` groups is the cheapest honest estimate.
    """
    R = true_means.shape[0]
    B = min(JACKKNIFE_BATCHES, R)
    if B < 2:
        return 0.0
    groups = np.array_split(np.arange(R), B)
    total = np.sum(true_means, axis=0)
    thetas = np.empty(B)
    for j, g in enumerate(groups):
        loo = (total - np.sum(true_means[g], axis=0)) / (R - g.size)
        thetas[j] = regret(mu_star, p_mean_welfare(loo, p))
    centered = thetas - np.mean(thetas)
    return float(np.sqrt((B - 1) / B * np.sum(centered ** 2)))


def _cell_row(
    policy: PolicyKind,
    instance: BanditInstance,
    horizon: int,
    p: float,
    runs: int,
    base_seed: int,
) -> RegretRow:
    streams = [run_stream(base_seed, policy, p, horizon, r) for r in range(runs)]
    trajectories = run_batch(policy, instance, horizon, p, streams)
    tm = np.stack([t.true_means for t in trajectories])
    e_hat = np.mean(tm, axis=0)
    reg = regret(instance.mu_star, p_mean_welfare(e_hat, p))
    se = _jackknife_std_error(tm, instance.mu_star, p)
    taus = [t.tau for t in trajectories if t.tau is not None]
    tau_mean = float(np.mean(taus)) if taus else math.nan
    degenerate = sum(1 for r in range(runs) if p_mean_welfare(tm[r], p).degenerate)
    return RegretRow(
        policy=policy.display_name(),
        p=float(p),
        horizon=int(horizon),
        regret=reg,
        runs=runs,
        std_error=se,
        tau_mean=tau_mean,
        degenerate_runs=degenerate,
    )


def _cell_row_json(config_doc: dict, pol_i: int, p_i: int, h_i: int) -> RegretRow:
    config = ExperimentConfig.from_json(config_doc)
    instance = config.instance_spec.build()
    return _cell_row(
        config.policy_specs[pol_i],
        instance,
        config.horizon_grid[h_i],
        config.p_values[p_i],
        config.runs,
        config.base_seed,
    )


def sweep(config: ExperimentConfig, workers: int = 1) -> RegretTable:
    """Run every (policy, p, horizon) cell of the grid and collect regrets.

    Cells are independent, so any worker count yields identical results;
    rows come out in (policy, p, horizon) config order.
    """
    cells = [
        (pol_i, p_i, h_i)
        for pol_i in range(len(config.policy_specs))
        for p_i in range(len(config.p_values))
        for h_i in range(len(config.horizon_grid))
    ]
    doc = config.to_json()
    if workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_cell_row_json, doc, *cell) for cell in cells]
            rows = [f.result() for f in futures]
    else:
        instance = config.instance_spec.build()
        rows = [
            _cell_row(
                config.policy_specs[pol_i], instance,
                config.horizon_grid[h_i], config.p_values[p_i],
                config.runs, config.base_seed,
            )
            for (pol_i, p_i, h_i) in cells
        ]
    return RegretTable(rows=tuple(rows))


class TableFormatError(ValueError):
    """A regret CSV did not match the expected schema."""

    def __init__(self, message: str, line: int) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line


def _fmt(x: float) -> str:
    """Shortest decimal string that round-trips the float exactly."""
    return repr(float(x))


def write_table(table: RegretTable, path: str | os.PathLike) -> None:
    """Write a regret table as CSV, atomically (write to temp, then rename)."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for row in table.rows:
                writer.writerow([
                    row.policy,
                    _fmt(row.p),
                    str(row.horizon),
                    _fmt(row.regret),
                    str(row.runs),
                    _fmt(row.std_error),
                    _fmt(row.tau_mean),
                    str(row.degenerate_runs),
                ])
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_table(path: str | os.PathLike) -> RegretTable:
    """Parse a regret CSV written by :func:`write_table`; lossless round-trip."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise TableFormatError("empty file, expected a header row", line=1)
        if tuple(header) != CSV_HEADER:
            raise TableFormatError(
                f"bad header {header!r}, expected {','.join(CSV_HEADER)}", line=1,
            )
        for lineno, rec in enumerate(reader, start=2):
            if len(rec) != len(CSV_HEADER):
                raise TableFormatError(
                    f"expected {len(CSV_HEADER)} fields, found {len(rec)}", line=lineno,
                )
            try:
                rows.append(RegretRow(
                    policy=rec[0],
                    p=float(rec[1]),
                    horizon=int(rec[2]),
                    regret=float(rec[3]),
                    runs=int(rec[4]),
                    std_error=float(rec[5]),
                    tau_mean=float(rec[6]),
                    degenerate_runs=int(rec[7]),
                ))
            except ValueError as exc:
                raise TableFormatError(str(exc), line=lineno) from exc
    return RegretTable(rows=tuple(rows))
