"""Empirical verification of the theory's guarantees against recorded runs.

Each check replays a claim that should hold on any correct implementation:

* **Concentration event.**  At every round, every sampled arm's empirical
  mean stays within the Hoeffding width of its true mean.  The event has
  probability at least ``1 - 2/T``, so a batch of runs can bound its
  empirical frequency.
* **Exploration-length sandwich.**  On runs where the event holds, the
  adaptive stopping time tau of the two-phase policy lies in
  ``[32 k S, 128 k S]`` with ``S = 4 p_a^2 sigma^2 ln(T) / mu_star^2``
  (plus/minus one block of slack for the block-quantized sampler).
* **Near-optimality of index-phase arms.**  Any arm pulled at least once in
  the index phase satisfies
  ``mu_i >= mu_star - 4 sqrt(2 sigma^2 ln(T) / (T_i - 1))``.
* **Numeric inequalities.**  The scalar linearization bounds used in the
  analysis: ``(1-x)^a >= 1 - 2ax`` on ``x in [0, 1/2], a >= 0``, and
  ``(1-x)^(-q) <= 1 + 2qx`` for ``q >= 1`` on ``x in [0, 1/(2q)]`` and for
  ``0 < q <= 1`` on ``x in [0, 1/2]``.
* **Permutation marginals.**  The block sampler gives every arm probability
  exactly ``1/k`` at every block position.

The sandwich and near-optimality checks are deterministic consequences of
the concentration event: a single violation on a good run is an
implementation bug, not bad luck, which makes this module the sharpest
correctness oracle available for the policy engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .harness import RunTrajectory, run_batch, run_stream
from .policies import WELFARIST_UCB, PolicyKind, normalize_fairness
from .rewards import BanditInstance, InstanceSpec
from .rng import RngStream, permutation_from_uniforms

#: Absolute slack applied when testing the numeric inequalities in floats.
NUMERIC_TOLERANCE = 1e-12


@dataclass(frozen=True)
class GoodEventReport:
    """How often the concentration event held over a batch of runs."""

    runs_total: int
    runs_good: int
    bound: float
    violations: tuple[tuple[int, int, int], ...]  # (run, round, arm) of first failure

    @property
    def frequency(self) -> float:
        return self.runs_good / self.runs_total

    def to_json(self) -> dict:
        return {
            "runs_total": self.runs_total,
            "runs_good": self.runs_good,
            "bound": self.bound,
            "violations": [list(v) for v in self.violations],
        }


@dataclass(frozen=True)
class LemmaVerdict:
    lemma_id: str
    instances_checked: int
    violations: int
    worst_margin: float

    def to_json(self) -> dict:
        return {
            "lemma_id": self.lemma_id,
            "instances_checked": self.instances_checked,
            "violations": self.violations,
            "worst_margin": self.worst_margin,
        }


def _merge(lemma_id: str, parts: list[LemmaVerdict]) -> LemmaVerdict:
    checked = sum(v.instances_checked for v in parts)
    violations = sum(v.violations for v in parts)
    margins = [v.worst_margin for v in parts if math.isfinite(v.worst_margin)]
    return LemmaVerdict(
        lemma_id=lemma_id,
        instances_checked=checked,
        violations=violations,
        worst_margin=min(margins) if margins else math.inf,
    )


def good_event_violation(traj: RunTrajectory, instance: BanditInstance) -> tuple[int, int] | None:
    """First (round, arm) where an empirical mean left its confidence band.

    Statistics only move when an arm is pulled, so checking each post-update
    snapshot covers every (round, arm) pair with at least one sample.
    """
    if not traj.has_audit:
        raise ValueError("good-event check requires a trajectory recorded with audit=True")
    T = traj.horizon
    sigma_sq = instance.sigma_proxy ** 2
    width = 2.0 * np.sqrt(2.0 * sigma_sq * math.log(T) / traj.snap_counts)
    dev = np.abs(traj.snap_means - instance.means[traj.chosen])
    bad = dev > width
    if not bad.any():
        return None
    i = int(np.argmax(bad))
    return (i + 1, int(traj.chosen[i]))


def check_good_event(traj: RunTrajectory, instance: BanditInstance) -> bool:
    """True iff every sampled arm stayed inside its width at every round."""
    return good_event_violation(traj, instance) is None


def good_event_report(trajectories: list[RunTrajectory], instance: BanditInstance) -> GoodEventReport:
    T = trajectories[0].horizon
    violations = []
    good = 0
    for r, traj in enumerate(trajectories):
        hit = good_event_violation(traj, instance)
        if hit is None:
            good += 1
        else:
            violations.append((r, hit[0], hit[1]))
    return GoodEventReport(
        runs_total=len(trajectories),
        runs_good=good,
        bound=1.0 - 2.0 / T,
        violations=tuple(violations),
    )


def expected_tau_window(instance: BanditInstance, horizon: int, p: float, k_slack: bool = True) -> tuple[float, float]:
    """The exploration-length sandwich ``[32 k S, 128 k S]`` for one setup.

    ``k_slack`` widens both ends by one block: the sampler commits to whole
    permutation blocks while the analysis counts per-arm samples.
    """
    k = instance.k
    p_a = normalize_fairness(p)
    s = 4.0 * p_a ** 2 * instance.sigma_proxy ** 2 * math.log(horizon) / instance.mu_star ** 2
    slack = k if k_slack else 0
    return (32.0 * k * s - slack, 128.0 * k * s + slack)


def check_tau_bounds(traj: RunTrajectory, instance: BanditInstance, p: float) -> LemmaVerdict:
    """Test one run's stopping time against the sandwich.

    Callers must pre-filter to runs where the concentration event holds; a
    run whose exploration never stopped is reported as inapplicable
    (``instances_checked = 0``), not as a violation.
    """
    if traj.tau is None:
        return LemmaVerdict("tau_bounds", 0, 0, math.inf)
    lo, hi = expected_tau_window(instance, traj.horizon, p)
    margin = min(traj.tau - lo, hi - traj.tau)
    return LemmaVerdict("tau_bounds", 1, int(margin < 0.0), float(margin))


def check_phase2_near_optimality(traj: RunTrajectory, instance: BanditInstance) -> LemmaVerdict:
    """Every arm pulled during index play must be near-optimal.

    Checks ``mu_i >= mu_star - 4 sqrt(2 sigma^2 ln(T) / (T_i - 1))`` with
    ``T_i`` the arm's final pull count.  Holds deterministically whenever the
    concentration event does.
    """
    T = traj.horizon
    arms = np.unique(traj.chosen[traj.index_phase])
    if arms.size == 0:
        return LemmaVerdict("phase2_near_optimality", 0, 0, math.inf)
    n = traj.final_counts[arms]
    if np.any(n <= 1):
        raise ValueError("an index-phase arm with a single pull cannot occur after uniform exploration")
    sigma_sq = instance.sigma_proxy ** 2
    bound = instance.mu_star - 4.0 * np.sqrt(2.0 * sigma_sq * math.log(T) / (n - 1))
    margins = instance.means[arms] - bound
    return LemmaVerdict(
        "phase2_near_optimality",
        instances_checked=int(arms.size),
        violations=int(np.sum(margins < 0.0)),
        worst_margin=float(np.min(margins)),
    )


def check_numeric_claims(samples: int, rng: RngStream) -> LemmaVerdict:
    """Property-sample the three scalar inequalities used by the analysis.

    Exponents are drawn log-uniformly so both ends of their ranges are
    exercised; interval endpoints are added deterministically.  A violation
    is a margin below ``-NUMERIC_TOLERANCE``.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    gen = rng.child("numeric").generator()

    def margin_stats(margins: np.ndarray) -> tuple[int, float]:
        return int(np.sum(margins < -NUMERIC_TOLERANCE)), float(np.min(margins))

    # (1-x)^a >= 1 - 2ax on x in [0, 1/2], a >= 0  (a log-uniform, plus edges).
    x = 0.5 * gen.random(samples)
    a = np.exp(gen.random(samples) * (math.log(100.0) - math.log(1e-6)) + math.log(1e-6))
    x = np.concatenate([x, [0.0, 0.5, 0.0, 0.5]])
    a = np.concatenate([a, [0.0, 0.0, 100.0, 1.0]])
    v1, m1 = margin_stats((1.0 - x) ** a - (1.0 - 2.0 * a * x))

    # (1-x)^(-q) <= 1 + 2qx for q >= 1, x in [0, 1/(2q)].
    q = np.exp(gen.random(samples) * math.log(100.0))
    xq = gen.random(samples) / (2.0 * q)
    q = np.concatenate([q, [1.0, 1.0, 100.0]])
    xq = np.concatenate([xq, [0.0, 0.5, 1.0 / 200.0]])
    v2, m2 = margin_stats((1.0 + 2.0 * q * xq) - (1.0 - xq) ** (-q))

    # Same bound for 0 < q <= 1, x in [0, 1/2].
    ql = 1.0 - gen.random(samples)  # (0, 1]
    xl = 0.5 * gen.random(samples)
    ql = np.concatenate([ql, [1.0, 1e-9, 1.0]])
    xl = np.concatenate([xl, [0.5, 0.5, 0.0]])
    v3, m3 = margin_stats((1.0 + 2.0 * ql * xl) - (1.0 - xl) ** (-ql))

    total = x.size + q.size + ql.size
    return LemmaVerdict(
        "numeric_inequalities",
        instances_checked=total,
        violations=v1 + v2 + v3,
        worst_margin=min(m1, m2, m3),
    )


def check_permutation_marginals(k: int, blocks: int, rng: RngStream) -> LemmaVerdict:
    """Empirical one-step marginals of the block permutation sampler.

    Draws ``blocks`` permutations exactly the way the exploration phase does
    (ranking one uniform per arm) and requires every (position, arm)
    frequency to sit within ``4 sqrt((1/k)(1 - 1/k) / blocks)`` of ``1/k``.
    """
    if blocks < 1000:
        raise ValueError("at least 1000 blocks are needed for a meaningful marginal check")
    u = rng.child("perm").generator().random((blocks, k))
    perms = permutation_from_uniforms(u)
    freq = np.empty((k, k))  # position x arm
    for pos in range(k):
        freq[pos] = np.bincount(perms[:, pos], minlength=k) / blocks
    tol = 4.0 * math.sqrt((1.0 / k) * (1.0 - 1.0 / k) / blocks)
    margins = tol - np.abs(freq - 1.0 / k)
    return LemmaVerdict(
        "permutation_marginals",
        instances_checked=k * k,
        violations=int(np.sum(margins < 0.0)),
        worst_margin=float(np.min(margins)),
    )


def merge_verdicts(lemma_id: str, parts: list[LemmaVerdict]) -> LemmaVerdict:
    """Combine per-run verdicts of one lemma into a suite-level verdict."""
    return _merge(lemma_id, parts)


@dataclass(frozen=True)
class VerifyConfig:
    """Setup of the default verification suite.

    JSON form mirrors the field names; unset fields fall back to the desk
    defaults in :func:`default_verify_config`.
    """

    instance_spec: "InstanceSpec"
    horizon: int
    runs: int
    p: float
    base_seed: int
    blocks: int
    numeric_samples: int

    def to_json(self) -> dict:
        return {
            "instance_spec": self.instance_spec.to_json(),
            "horizon": self.horizon,
            "runs": self.runs,
            "p": self.p,
            "base_seed": self.base_seed,
            "blocks": self.blocks,
            "numeric_samples": self.numeric_samples,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "VerifyConfig":
        base = default_verify_config().to_json()
        known = set(base)
        extra = set(doc) - known
        if extra:
            raise ValueError(f"unknown verify config fields: {sorted(extra)}")
        merged = {**base, **doc}
        return cls(
            instance_spec=InstanceSpec.from_json(merged["instance_spec"]),
            horizon=int(merged["horizon"]),
            runs=int(merged["runs"]),
            p=float(merged["p"]),
            base_seed=int(merged["base_seed"]),
            blocks=int(merged["blocks"]),
            numeric_samples=int(merged["numeric_samples"]),
        )


def default_verify_config() -> VerifyConfig:
    """Desk-scale suite: small Gaussian instance, 200 runs, 1e6 numeric samples."""
    return VerifyConfig(
        instance_spec=InstanceSpec(
            kind="gaussian", k=5, mean_low=10.0, mean_high=100.0, std=20.0, seed=7,
        ),
        horizon=10_000,
        runs=200,
        p=0.0,
        base_seed=20_260_809,
        blocks=100_000,
        numeric_samples=1_000_000,
    )


def run_verify_suite(config: VerifyConfig) -> dict:
    """Execute every check and emit a JSON-serializable report.

    The two-phase policy is replayed with audit snapshots; the sandwich and
    near-optimality lemmas are evaluated only on runs where the concentration
    event held (they are conditional claims).  ``passed`` requires zero
    violations from every verdict and a good-event frequency of at least
    ``1 - 2/T`` minus three binomial standard errors.
    """
    instance = config.instance_spec.build()
    policy = PolicyKind(variant=WELFARIST_UCB)
    streams = [
        run_stream(config.base_seed, policy, config.p, config.horizon, r)
        for r in range(config.runs)
    ]
    trajectories = run_batch(policy, instance, config.horizon, config.p, streams, audit=True)

    report = good_event_report(trajectories, instance)
    good_runs = [t for r, t in enumerate(trajectories)
                 if all(v[0] != r for v in report.violations)]

    tau_verdict = merge_verdicts(
        "tau_bounds", [check_tau_bounds(t, instance, config.p) for t in good_runs],
    )
    near_opt_verdict = merge_verdicts(
        "phase2_near_optimality",
        [check_phase2_near_optimality(t, instance) for t in good_runs],
    )
    rng = RngStream(config.base_seed).child("verify")
    numeric_verdict = check_numeric_claims(config.numeric_samples, rng)
    perm_verdict = check_permutation_marginals(instance.k, config.blocks, rng)

    q = 2.0 / config.horizon
    slack = 3.0 * math.sqrt(q * (1.0 - q) / config.runs)
    threshold = 1.0 - q - slack
    freq_ok = report.frequency >= threshold

    verdicts = [tau_verdict, near_opt_verdict, numeric_verdict, perm_verdict]
    passed = freq_ok and all(v.violations == 0 for v in verdicts)
    return {
        "config": config.to_json(),
        "good_event": {
            **report.to_json(),
            "frequency": report.frequency,
            "threshold": threshold,
            "ok": freq_ok,
        },
        "verdicts": [v.to_json() for v in verdicts],
        "passed": passed,
    }
