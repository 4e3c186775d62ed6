"""Nash and p-mean welfare: the fairness dial and its numeric safety.

Run: python demos/03_welfare_metrics.py
"""

import numpy as np

from welfarist_bandits import nash_welfare, p_mean_welfare, regret

# A toy reward profile over ten rounds: mostly good rounds, two poor ones.
profile = np.array([9.0, 9.5, 10.0, 9.8, 0.5, 9.9, 10.0, 9.7, 0.8, 9.6])
mu_star = 10.0

print("round profile:", profile.tolist())
print(f"{'p':>6} | {'welfare':>8} | {'regret':>7}")
for p in (1.0, 0.5, 0.0, -0.5, -1.5, -3.0):
    w = p_mean_welfare(profile, p)
    print(f"{p:6.1f} | {w.value:8.3f} | {regret(mu_star, w):7.3f}")
print("smaller p weighs the poor rounds more: the fairness dial.")

# p = 0 is exactly the geometric mean (Nash welfare):
print("\nnash:", nash_welfare(profile).value, "== p-mean at 0:", p_mean_welfare(profile, 0.0).value)

# Everything runs in the log domain, so horizon-scale products cannot
# underflow: the geometric mean of 1e5 copies of 1e-30 is just 1e-30.
tiny = np.full(100_000, 1e-30)
print("\ngeometric mean of 1e5 values of 1e-30:", nash_welfare(tiny).value)

# Nonpositive entries make Nash (and negative-p) welfare undefined; the
# library floors them to zero and raises a flag instead of crashing a sweep.
broken = p_mean_welfare([0.7, 0.0, 0.9], -1.0)
print("welfare with a zero round at p=-1:", broken.value, "| degenerate:", broken.degenerate)
