"""Arm-selection policies.

The centerpiece is the two-phase welfarist index policy:

* **Phase I (uniform exploration).**  Rounds proceed in blocks of ``k``; at
  each block boundary a fresh uniform permutation of the arms is drawn and
  the block follows it.  Before every pull (once each arm has at least one
  sample) an adaptive stopping rule is tested: exploration ends at the first
  round where some arm ``i`` satisfies both

      mu_hat_i > w_i      and      n_i > 192 * p_a^2 * sigma^2 * ln(T) / (mu_hat_i - w_i)^2

  with ``w_i = 2 * sqrt(2 * sigma^2 * ln(T) / n_i)`` the confidence width and
  ``p_a`` the normalized fairness order.  If the rule never fires, Phase I is
  capped at the horizon.

* **Phase II (UCB).**  Standard index play on ``mu_hat_i + w_i``.

Baselines: plain UCB on the same index; the Nash confidence bound (NCB)
index ``mu_hat + c * sqrt(max(mu_hat, 0) * ln(T) / n)`` behind a short
round-robin warmup; and explore-then-UCB with a fixed round-robin budget.

Conventions shared by every policy: natural logarithms, zero-count arms have
infinite width (forced exploration), and argmax ties break to the lowest arm
index so runs are reproducible.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .rng import RngStream, draw_permutation

WELFARIST_UCB = "welfarist_ucb"
PLAIN_UCB = "ucb"
NCB = "ncb"
EXPLORE_THEN_UCB = "explore_then_ucb"

_VARIANTS = (WELFARIST_UCB, PLAIN_UCB, NCB, EXPLORE_THEN_UCB)

#: Constant in the Phase-I stopping threshold ``192 p_a^2 sigma^2 ln T / (.)^2``.
STOP_RULE_CONSTANT = 192.0


class Phase(enum.Enum):
    """Which stage of a two-stage policy a state is in."""

    UNIFORM = "uniform"
    INDEX = "index"


class HorizonExhausted(RuntimeError):
    """Raised when a selection is requested past the configured horizon."""


class WidthUndefined(ValueError):
    """Confidence width requested for an unsampled arm; treat as +infinity."""


def normalize_fairness(p: float) -> float:
    """Fairness order actually used by the stopping rule: 1 unless p < -1."""
    p = float(p)
    if not math.isfinite(p):
        raise ValueError(f"fairness order must be finite, got {p}")
    return 1.0 if p >= -1.0 else p


def confidence_width(n: int, sigma_sq: float, horizon_T: int) -> float:
    """Hoeffding half-width ``2 sqrt(2 sigma^2 ln(T) / n)`` (natural log).

    Raises :class:`WidthUndefined` for ``n = 0``; callers must treat that as
    +infinity so unsampled arms dominate any index.
    """
    if n == 0:
        raise WidthUndefined("confidence width is undefined for an unsampled arm")
    if n < 0:
        raise ValueError(f"sample count must be non-negative, got {n}")
    if horizon_T < 2:
        raise ValueError(f"horizon must be at least 2, got {horizon_T}")
    return 2.0 * math.sqrt(2.0 * sigma_sq * math.log(horizon_T) / n)


@dataclass(frozen=True)
class PolicyKind:
    """A policy variant plus its schedule knobs.

    JSON form: ``{variant, explore_rounds_per_arm?, ncb_prefix_rounds?,
    ncb_width_constant?}``.  Unset knobs resolve to defaults at state
    initialization (they may depend on the horizon).
    """

    variant: str
    explore_rounds_per_arm: int | None = None
    ncb_prefix_rounds: int | None = None
    ncb_width_constant: float = 4.0

    def __post_init__(self) -> None:
        if self.variant not in _VARIANTS:
            raise ValueError(f"unknown policy variant {self.variant!r}")
        if self.explore_rounds_per_arm is not None and self.explore_rounds_per_arm < 1:
            raise ValueError("explore_rounds_per_arm must be at least 1")
        if self.ncb_prefix_rounds is not None and self.ncb_prefix_rounds < 0:
            raise ValueError("ncb_prefix_rounds must be non-negative")
        if not self.ncb_width_constant > 0.0:
            raise ValueError("ncb_width_constant must be positive")

    def to_json(self) -> dict:
        doc: dict = {"variant": self.variant}
        if self.explore_rounds_per_arm is not None:
            doc["explore_rounds_per_arm"] = self.explore_rounds_per_arm
        if self.ncb_prefix_rounds is not None:
            doc["ncb_prefix_rounds"] = self.ncb_prefix_rounds
        if self.ncb_width_constant != 4.0:
            doc["ncb_width_constant"] = self.ncb_width_constant
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "PolicyKind":
        known = {"variant", "explore_rounds_per_arm", "ncb_prefix_rounds", "ncb_width_constant"}
        extra = set(doc) - known
        if extra:
            raise ValueError(f"unknown policy spec fields: {sorted(extra)}")
        if "variant" not in doc:
            raise ValueError("policy spec is missing 'variant'")
        return cls(
            variant=str(doc["variant"]),
            explore_rounds_per_arm=(
                None if doc.get("explore_rounds_per_arm") is None
                else int(doc["explore_rounds_per_arm"])
            ),
            ncb_prefix_rounds=(
                None if doc.get("ncb_prefix_rounds") is None
                else int(doc["ncb_prefix_rounds"])
            ),
            ncb_width_constant=float(doc.get("ncb_width_constant", 4.0)),
        )

    def canonical_key(self) -> str:
        """Stable string identity used for seed derivation."""
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))

    def display_name(self) -> str:
        """Compact, unique label for CSV rows and plot legends.

        The variant name alone when every knob is at its default, otherwise
        the non-default knobs in brackets, e.g. ``explore_then_ucb[epa=4]``.
        """
        parts = []
        if self.explore_rounds_per_arm is not None:
            parts.append(f"epa={self.explore_rounds_per_arm}")
        if self.ncb_prefix_rounds is not None:
            parts.append(f"prefix={self.ncb_prefix_rounds}")
        if self.ncb_width_constant != 4.0:
            parts.append(f"c={self.ncb_width_constant!r}")
        return self.variant if not parts else f"{self.variant}[{','.join(parts)}]"


def default_explore_rounds_per_arm(horizon_T: int, k: int) -> int:
    """Explore-then-UCB default budget: about sqrt(T) rounds split round-robin."""
    return max(1, math.ceil(math.sqrt(horizon_T) / k))


def default_ncb_prefix_rounds(horizon_T: int, k: int) -> int:
    """Cap on the NCB warmup: ``3 k ln T`` rounds, never less than one pass."""
    return max(k, math.ceil(3.0 * k * math.log(horizon_T)))


@dataclass
class PolicyState:
    """Evolving statistics of one policy on one run.

    Single-threaded within a run; distinct runs own distinct states.  Arm
    indices are 0-based.  ``tau`` is the number of rounds spent in the
    uniform/warmup stage, set when the policy switches to index play and
    ``None`` while (or if never) switching.
    """

    policy: PolicyKind
    k: int
    horizon_T: int
    sigma_sq: float
    p_input: float
    p_a: float
    t: int = 1
    counts: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    emp_means: np.ndarray = field(default_factory=lambda: np.zeros(0))
    phase: Phase = Phase.UNIFORM
    tau: int | None = None
    block_perm: np.ndarray | None = None
    block_pos: int = 0
    explore_rounds_per_arm: int = 1
    ncb_prefix_cap: int = 0
    ncb_prefix_done: bool = False
    _perm_gen: np.random.Generator | None = None

    @property
    def log_T(self) -> float:
        return math.log(self.horizon_T)


def init_state(policy: PolicyKind, k: int, horizon_T: int, sigma_sq: float, p: float) -> PolicyState:
    """Fresh state at round 1 with zero counts and zero empirical means."""
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    if horizon_T < 2:
        raise ValueError(f"horizon must be at least 2, got {horizon_T}")
    if not sigma_sq > 0.0:
        raise ValueError(f"sigma_sq must be positive, got {sigma_sq}")
    state = PolicyState(
        policy=policy,
        k=k,
        horizon_T=horizon_T,
        sigma_sq=float(sigma_sq),
        p_input=float(p),
        p_a=normalize_fairness(p),
        counts=np.zeros(k, dtype=np.int64),
        emp_means=np.zeros(k, dtype=np.float64),
    )
    if policy.variant == PLAIN_UCB:
        state.phase = Phase.INDEX
        state.tau = 0
    if policy.variant == EXPLORE_THEN_UCB:
        state.explore_rounds_per_arm = (
            policy.explore_rounds_per_arm
            if policy.explore_rounds_per_arm is not None
            else default_explore_rounds_per_arm(horizon_T, k)
        )
    if policy.variant == NCB:
        state.ncb_prefix_cap = (
            policy.ncb_prefix_rounds
            if policy.ncb_prefix_rounds is not None
            else default_ncb_prefix_rounds(horizon_T, k)
        )
    return state


def _check_horizon(state: PolicyState) -> None:
    if state.t > state.horizon_T:
        raise HorizonExhausted(f"round {state.t} exceeds horizon {state.horizon_T}")


def hoeffding_width(counts: np.ndarray, sigma_sq: float, log_T: float) -> np.ndarray:
    """Vectorized confidence widths, +inf standing in for unsampled arms.

    This is the one width implementation the policies and the batched engine
    share; the verification module re-derives widths independently so that a
    bug here is observable there.
    """
    with np.errstate(divide="ignore"):
        w = 2.0 * np.sqrt(2.0 * sigma_sq * log_T / counts)
    return np.where(counts > 0, w, np.inf)


def _width_vector(state: PolicyState) -> np.ndarray:
    return hoeffding_width(state.counts, state.sigma_sq, state.log_T)


def ucb_select(state: PolicyState) -> int:
    """Argmax of ``mu_hat_i + width_i``; ties break to the lowest arm index."""
    _check_horizon(state)
    return int(np.argmax(state.emp_means + _width_vector(state)))


def phase1_should_terminate(state: PolicyState) -> bool:
    """Adaptive stopping rule for uniform exploration.

    False until every arm has a sample; then true iff some arm's empirical
    mean clears its width and its count exceeds the calibrated threshold.
    """
    if int(state.counts.min()) == 0:
        return False
    w = _width_vector(state)
    gap = state.emp_means - w
    clear = gap > 0.0
    if not np.any(clear):
        return False
    threshold = (
        STOP_RULE_CONSTANT * state.p_a ** 2 * state.sigma_sq * state.log_T / gap[clear] ** 2
    )
    return bool(np.any(state.counts[clear] > threshold))


def welfarist_select(state: PolicyState, rng: RngStream) -> int:
    """Next arm for the two-phase policy.

    While exploring, block boundaries draw a fresh uniform permutation from
    ``rng``'s ``"perm"`` substream; the stopping rule is tested before every
    pull and a mid-block switch abandons the rest of the permutation.  After
    the switch (recorded in ``tau``) selection is plain UCB.
    """
    _check_horizon(state)
    if state.phase is Phase.INDEX:
        return ucb_select(state)
    if phase1_should_terminate(state):
        state.phase = Phase.INDEX
        state.tau = state.t - 1
        state.block_perm = None
        return ucb_select(state)
    pos = (state.t - 1) % state.k
    if pos == 0 or state.block_perm is None:
        if state._perm_gen is None:
            state._perm_gen = rng.child("perm").generator()
        state.block_perm = draw_permutation(state._perm_gen, state.k)
    state.block_pos = pos
    return int(state.block_perm[pos])


def ncb_select(state: PolicyState) -> int:
    """Nash-confidence-bound index: ``mu_hat + c sqrt(max(mu_hat,0) ln T / n)``.

    Requires every arm sampled at least once (the warmup guarantees it);
    negative empirical means are clamped to zero inside the root only.
    """
    _check_horizon(state)
    if int(state.counts.min()) == 0:
        raise ValueError("ncb_select requires every arm to have been sampled")
    c = state.policy.ncb_width_constant
    width = c * np.sqrt(np.maximum(state.emp_means, 0.0) * state.log_T / state.counts)
    return int(np.argmax(state.emp_means + width))


def _ncb_prefix_active(state: PolicyState) -> bool:
    if state.ncb_prefix_done:
        return False
    if state.t <= state.k:
        return True
    sums = state.emp_means * state.counts
    if state.t > state.ncb_prefix_cap or bool(np.all(sums >= 1.0)):
        state.ncb_prefix_done = True
        state.phase = Phase.INDEX
        state.tau = state.t - 1
        return False
    return True


def explore_then_ucb_select(state: PolicyState) -> int:
    """Round-robin for the first ``k * explore_rounds_per_arm`` rounds, then UCB."""
    _check_horizon(state)
    budget = state.k * state.explore_rounds_per_arm
    if state.t <= budget:
        return (state.t - 1) % state.k
    if state.phase is Phase.UNIFORM:
        state.phase = Phase.INDEX
        state.tau = budget
    return ucb_select(state)


def select(state: PolicyState, rng: RngStream | None = None) -> int:
    """Dispatch to the state's policy; ``rng`` is required for the welfarist policy."""
    variant = state.policy.variant
    if variant == WELFARIST_UCB:
        if rng is None:
            raise ValueError("welfarist_ucb selection requires an RngStream")
        return welfarist_select(state, rng)
    if variant == PLAIN_UCB:
        return ucb_select(state)
    if variant == NCB:
        _check_horizon(state)
        if _ncb_prefix_active(state):
            return (state.t - 1) % state.k
        return ncb_select(state)
    return explore_then_ucb_select(state)


def update(state: PolicyState, arm: int, reward: float) -> PolicyState:
    """Fold one observed reward into the state's running statistics.

    Means follow the exact incremental rule ``((n-1) mu_hat + R) / n`` so
    that scalar and batched simulation agree bit for bit.
    """
    if not 0 <= arm < state.k:
        raise ValueError(f"arm index {arm} out of range for k={state.k}")
    n = int(state.counts[arm]) + 1
    state.emp_means[arm] = ((n - 1) * state.emp_means[arm] + reward) / n
    state.counts[arm] = n
    state.t += 1
    return state
