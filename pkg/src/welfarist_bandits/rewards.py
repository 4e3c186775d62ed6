"""Reward distributions, bandit instances, and their sampling contract.

An arm is a :class:`RewardDistribution` (Bernoulli or Gaussian); an ordered
collection of arms with a shared sub-Gaussian scale is a
:class:`BanditInstance`.  Arm means are assumed non-negative so that the
geometric-mean welfare downstream is well defined; individual Gaussian
rewards may still be negative.

All sampling is driven by one uniform variate per draw (Gaussians go through
the inverse normal CDF), which lets batched simulation and one-draw-at-a-time
sampling share a single stream layout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy.special import ndtri

from .rng import RngStream

BERNOULLI = "bernoulli"
GAUSSIAN = "gaussian"

#: Sub-Gaussian scale assigned to Bernoulli arms: the Hoeffding value for a
#: [0,1]-bounded variable.  Instances may override it (``sigma_override``).
BERNOULLI_SIGMA = 0.5

# Floor on the uniform variate before inverting the normal CDF; keeps the
# measure-zero draw u == 0.0 from producing -inf.
_U_FLOOR = 1e-300


@dataclass(frozen=True)
class RewardDistribution:
    """One arm's sampling law.

    ``std`` is only meaningful for Gaussian arms and must be ``None`` for
    Bernoulli arms.
    """

    kind: str
    mean: float
    std: float | None = None

    def __post_init__(self) -> None:
        if self.kind == BERNOULLI:
            if not 0.0 <= self.mean <= 1.0:
                raise ValueError(f"Bernoulli mean must lie in [0,1], got {self.mean}")
            if self.std is not None:
                raise ValueError("Bernoulli arms take no std parameter")
        elif self.kind == GAUSSIAN:
            if self.std is None or self.std < 0.0:
                raise ValueError(f"Gaussian std must be a nonnegative real, got {self.std}")
            if not math.isfinite(self.mean):
                raise ValueError(f"Gaussian mean must be finite, got {self.mean}")
        else:
            raise ValueError(f"unknown distribution kind {self.kind!r}")

    @classmethod
    def bernoulli(cls, mean: float) -> "RewardDistribution":
        return cls(BERNOULLI, float(mean))

    @classmethod
    def gaussian(cls, mean: float, std: float) -> "RewardDistribution":
        return cls(GAUSSIAN, float(mean), float(std))

    @property
    def expected_value(self) -> float:
        return self.mean


def sub_gaussian_proxy(dist: RewardDistribution) -> float:
    """Sub-Gaussian scale sigma of one arm: its std for Gaussians, the
    Hoeffding value 1/2 for [0,1]-bounded Bernoulli rewards."""
    if dist.kind == GAUSSIAN:
        return float(dist.std)  # type: ignore[arg-type]
    return BERNOULLI_SIGMA


def reward_from_uniform(dist: RewardDistribution, u: Any) -> Any:
    """Transform uniform variate(s) in [0,1) into reward draw(s) from ``dist``.

    This is the single transform shared by :func:`sample_reward` and the
    batched simulation engine, so both produce bit-identical rewards from the
    same stream.
    """
    if dist.kind == BERNOULLI:
        return np.where(np.asarray(u) < dist.mean, 1.0, 0.0)
    z = ndtri(np.maximum(u, _U_FLOOR))
    return dist.mean + dist.std * z  # type: ignore[operator]


def sample_reward(dist: RewardDistribution, rng: RngStream) -> float:
    """One reward draw from ``dist``; the first draw of ``rng``'s stream.

    Bernoulli draws are exactly 0.0 or 1.0; Gaussian draws may be negative.
    """
    u = rng.generator().random()
    return float(reward_from_uniform(dist, u))


@dataclass(frozen=True)
class BanditInstance:
    """Ordered arm set with its derived optimum and shared sub-Gaussian scale.

    Invariants enforced at construction: all arm means are non-negative,
    ``mu_star`` equals the best arm mean exactly, and ``sigma_proxy`` is a
    positive scale at least as large as every arm's own proxy (for Bernoulli
    arms the claimed proxy may be overridden instance-wide, see
    :func:`make_instance`).
    """

    arms: tuple[RewardDistribution, ...]
    sigma_proxy: float
    mu_star: float

    def __post_init__(self) -> None:
        if len(self.arms) < 1:
            raise ValueError("an instance needs at least one arm")
        means = [a.mean for a in self.arms]
        if min(means) < 0.0:
            raise ValueError("arm means must be non-negative")
        if self.mu_star != max(means):
            raise ValueError("mu_star must equal the maximum arm mean")
        if not (self.sigma_proxy > 0.0 and math.isfinite(self.sigma_proxy)):
            raise ValueError(f"sigma_proxy must be a positive real, got {self.sigma_proxy}")
        gaussian_stds = [a.std for a in self.arms if a.kind == GAUSSIAN]
        if gaussian_stds and self.sigma_proxy < max(gaussian_stds):  # type: ignore[type-var]
            raise ValueError("sigma_proxy must cover every Gaussian arm's std")

    @property
    def k(self) -> int:
        return len(self.arms)

    @property
    def means(self) -> np.ndarray:
        return np.array([a.mean for a in self.arms], dtype=np.float64)

    @classmethod
    def from_arms(
        cls, arms: list[RewardDistribution] | tuple[RewardDistribution, ...],
        sigma_override: float | None = None,
    ) -> "BanditInstance":
        """Build an instance, deriving ``mu_star`` and ``sigma_proxy``.

        ``sigma_override`` replaces the per-arm Bernoulli proxy (the default
        1/2 Hoeffding value is often loose); it may not undercut a Gaussian
        arm's actual std.
        """
        arms = tuple(arms)
        if sigma_override is not None:
            gaussian_stds = [a.std for a in arms if a.kind == GAUSSIAN]
            if gaussian_stds and sigma_override < max(gaussian_stds):  # type: ignore[type-var]
                raise ValueError("sigma_override cannot undercut a Gaussian arm's std")
            proxies = [
                float(sigma_override) if a.kind == BERNOULLI else sub_gaussian_proxy(a)
                for a in arms
            ]
            sigma = max(max(proxies), float(sigma_override))
        else:
            sigma = max(sub_gaussian_proxy(a) for a in arms)
        return cls(arms=arms, sigma_proxy=sigma, mu_star=max(a.mean for a in arms))


def make_instance(
    kind: str,
    k: int,
    mean_low: float,
    mean_high: float,
    std: float | None = None,
    rng: RngStream | None = None,
    sigma_override: float | None = None,
) -> BanditInstance:
    """Draw ``k`` arms with means i.i.d. uniform on ``[mean_low, mean_high]``.

    ``std`` is required exactly when ``kind`` is Gaussian.  Construction is a
    pure function of ``rng``.
    """
    if kind not in (BERNOULLI, GAUSSIAN):
        raise ValueError(f"unknown instance kind {kind!r}")
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    if mean_low < 0.0:
        raise ValueError("mean_low must be non-negative (arm means are non-negative)")
    if mean_high < mean_low:
        raise ValueError("mean_high must be at least mean_low")
    if kind == BERNOULLI:
        if mean_high > 1.0:
            raise ValueError("Bernoulli means cannot exceed 1")
        if std is not None:
            raise ValueError("std is only valid for Gaussian instances")
    if kind == GAUSSIAN and std is None:
        raise ValueError("Gaussian instances require std")
    if rng is None:
        raise ValueError("make_instance requires an RngStream")

    u = rng.child("means").generator().random(k)
    means = mean_low + (mean_high - mean_low) * u
    if kind == BERNOULLI:
        arms = [RewardDistribution.bernoulli(m) for m in means]
    else:
        arms = [RewardDistribution.gaussian(m, std) for m in means]  # type: ignore[arg-type]
    return BanditInstance.from_arms(arms, sigma_override=sigma_override)


@dataclass(frozen=True)
class InstanceSpec:
    """Serializable recipe for a :class:`BanditInstance`.

    JSON form: ``{kind, k, mean_low, mean_high, std?, sigma_override?, seed}``.
    """

    kind: str
    k: int
    mean_low: float
    mean_high: float
    seed: int
    std: float | None = None
    sigma_override: float | None = None

    def build(self) -> BanditInstance:
        return make_instance(
            self.kind, self.k, self.mean_low, self.mean_high,
            std=self.std, rng=RngStream(self.seed), sigma_override=self.sigma_override,
        )

    def to_json(self) -> dict:
        doc: dict = {
            "kind": self.kind,
            "k": self.k,
            "mean_low": self.mean_low,
            "mean_high": self.mean_high,
            "seed": self.seed,
        }
        if self.std is not None:
            doc["std"] = self.std
        if self.sigma_override is not None:
            doc["sigma_override"] = self.sigma_override
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "InstanceSpec":
        try:
            return cls(
                kind=str(doc["kind"]),
                k=int(doc["k"]),
                mean_low=float(doc["mean_low"]),
                mean_high=float(doc["mean_high"]),
                seed=int(doc["seed"]),
                std=None if doc.get("std") is None else float(doc["std"]),
                sigma_override=(
                    None if doc.get("sigma_override") is None
                    else float(doc["sigma_override"])
                ),
            )
        except KeyError as exc:
            raise ValueError(f"instance spec is missing field {exc.args[0]!r}") from exc
