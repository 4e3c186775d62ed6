"""Numerically stable welfare aggregation and regret for fairness metrics.

A *mean trajectory* is the length-T sequence of per-round estimated expected
rewards of a policy.  Welfare collapses it to a scalar:

* Nash welfare    -- geometric mean, ``exp(mean(log e_t))``,
* p-mean welfare  -- generalized power mean ``((1/T) sum e_t^p)^(1/p)``,
  with ``p = 0`` defined as the Nash case and ``p = 1`` the arithmetic mean.

Everything runs in the log domain with a max-shifted log-sum-exp: a Nash
product over 1e5 rounds, or powers of means near 1e3 at ``p = -1.5``, overflow
naive arithmetic long before the answer stops being representable.

Nonpositive entries make the geometric mean (and any ``p < 0`` mean) either
zero or undefined; rather than raising, those floor the welfare to 0 and set
a ``degenerate`` flag so the caller can see the violation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class WelfareValue:
    """A welfare scalar plus a flag marking a floored, ill-defined input."""

    value: float
    degenerate: bool = False


def _as_trajectory(values) -> np.ndarray:
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size == 0:
        raise ValueError("welfare of an empty trajectory is undefined")
    return v


def _logsumexp(x: np.ndarray) -> float:
    m = float(np.max(x))
    if m == -math.inf:
        return -math.inf
    return m + math.log(float(np.sum(np.exp(x - m))))


def nash_welfare(values) -> WelfareValue:
    """Geometric mean of a positive trajectory, computed in the log domain.

    Any nonpositive entry floors the result to 0 with ``degenerate=True``.
    """
    v = _as_trajectory(values)
    if np.any(v <= 0.0):
        return WelfareValue(0.0, degenerate=True)
    return WelfareValue(float(np.exp(np.mean(np.log(v)))), degenerate=False)


def p_mean_welfare(values, p: float) -> WelfareValue:
    """Generalized power mean of order ``p`` of a trajectory.

    ``p = 0`` dispatches exactly to :func:`nash_welfare` (no 1/p limit is
    evaluated).  For ``p < 0`` a nonpositive entry makes the mean undefined:
    the value floors to 0 with ``degenerate=True``.  For ``p > 0`` zero
    entries contribute 0 to the power sum (the limit convention); negative
    entries are treated the same way but additionally set the flag, since a
    negative estimated mean is an input-contract violation rather than noise
    hitting an attainable boundary.
    """
    p = float(p)
    if not math.isfinite(p):
        raise ValueError(f"fairness order p must be finite, got {p}")
    v = _as_trajectory(values)
    if p == 0.0:
        return nash_welfare(v)

    if p < 0.0:
        if np.any(v <= 0.0):
            return WelfareValue(0.0, degenerate=True)
        lse = _logsumexp(p * np.log(v))
        return WelfareValue(float(np.exp((lse - math.log(v.size)) / p)), degenerate=False)

    degenerate = bool(np.any(v < 0.0))
    pos = v > 0.0
    if not np.any(pos):
        return WelfareValue(0.0, degenerate=degenerate)
    lse = _logsumexp(p * np.log(v[pos]))
    return WelfareValue(float(np.exp((lse - math.log(v.size)) / p)), degenerate=degenerate)


def regret(mu_star: float, welfare: WelfareValue) -> float:
    """Shortfall of achieved welfare from the best arm's mean.

    A degenerate welfare has value 0, so its regret is ``mu_star`` itself.
    """
    if mu_star < 0.0:
        raise ValueError(f"mu_star must be non-negative, got {mu_star}")
    return float(mu_star) - welfare.value
