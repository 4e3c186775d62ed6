"""A single run of the two-phase policy, step by step.

The policy explores in random permutation blocks until an adaptive stopping
rule is confident some arm's mean is resolvable, then switches to UCB play.

Run: python demos/02_policy_walkthrough.py
"""

import numpy as np

from welfarist_bandits import PolicyKind, RngStream, make_instance, run_single, run_stream
from welfarist_bandits.theorycheck import expected_tau_window

instance = make_instance("gaussian", 5, 10.0, 100.0, std=20.0, rng=RngStream(7))
print("arm means:", np.round(instance.means, 1), "| mu* =", round(instance.mu_star, 1))

policy = PolicyKind(variant="welfarist_ucb")
horizon, p = 5000, 0.0
traj = run_single(policy, instance, horizon, p, run_stream(1, policy, p, horizon, 0))

print("\nuniform stage lasted tau =", traj.tau, "rounds")
lo, hi = expected_tau_window(instance, horizon, p)
print(f"theory window (with one block of slack): [{lo:.0f}, {hi:.0f}]")

print("\npulls per arm after the full horizon:", traj.final_counts.tolist())
share = traj.true_means[traj.index_phase].mean() / instance.mu_star
print(f"average true mean during index play: {share:.1%} of mu*")

# During the uniform stage every arm is pulled equally often (block structure):
uniform_counts = np.bincount(traj.chosen[~traj.index_phase], minlength=instance.k)
print("uniform-stage pulls per arm:", uniform_counts.tolist())

# Stronger fairness demands (p < -1) lengthen the uniform stage quadratically:
for fairness in (0.0, -1.5, -2.0):
    t = run_single(policy, instance, horizon, fairness, run_stream(1, policy, fairness, horizon, 0))
    print(f"p = {fairness:5.1f}: tau = {t.tau}")
