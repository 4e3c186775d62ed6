"""Arms, instances, and the deterministic stream contract.

Run: python demos/01_arms_and_instances.py
"""

import numpy as np

from welfarist_bandits import RngStream, make_instance, sample_reward, sub_gaussian_proxy
from welfarist_bandits.rewards import RewardDistribution, reward_from_uniform

# Two reward families share one interface: a mean and a sub-Gaussian scale.
coin = RewardDistribution.bernoulli(0.3)
noisy = RewardDistribution.gaussian(5.0, 2.0)
print("Bernoulli(0.3): proxy sigma =", sub_gaussian_proxy(coin))
print("Gaussian(5, 2): proxy sigma =", sub_gaussian_proxy(noisy))

# Sampling is a pure function of a (seed, stream_id) pair: same stream, same
# draw, forever.  Parallel runs just get different stream ids.
stream = RngStream(seed=2024, stream_id=9)
print("\nfirst draw, twice:", sample_reward(noisy, stream), sample_reward(noisy, stream))

# Batched draws consume the stream exactly like repeated single draws, which
# is what lets the vectorized simulator reproduce scalar runs bit for bit.
u = stream.generator().random(5)
print("five draws through the shared transform:", np.round(reward_from_uniform(noisy, u), 3))

# A benchmark instance: 8 Gaussian arms with means drawn uniformly.
instance = make_instance("gaussian", 8, 10.0, 1000.0, std=20.0, rng=RngStream(7))
print("\ninstance means:", np.round(instance.means, 1))
print("best mean mu* =", round(instance.mu_star, 2), "| shared sigma =", instance.sigma_proxy)

# Negative realizations are fine (and expected) for Gaussian arms even though
# the *means* must be non-negative for the welfare metrics downstream.
lows = reward_from_uniform(RewardDistribution.gaussian(1.0, 30.0), RngStream(1).generator().random(1000))
print("share of negative draws from Gaussian(1, 30):", float((lows < 0).mean()))
