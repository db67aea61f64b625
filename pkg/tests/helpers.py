"""Shared generators for randomized contract tests."""

import numpy as np

from energy_contracts import Contract, TypeProfile


def random_ladder(rng: np.random.Generator, k: int) -> TypeProfile:
    """Strictly increasing type ladder with O(1) values."""
    gaps = rng.uniform(0.1, 1.0, size=k)
    return TypeProfile(tuple(np.cumsum(gaps) + rng.uniform(0.1, 1.0)))


def random_local_ic_contract(
    rng: np.random.Generator, k_max: int = 6, ir_slack_max: float = 0.5
) -> tuple[TypeProfile, Contract]:
    """Random menu with nondecreasing q whose rewards sit inside the window
    allowed by both adjacent truth-telling constraints.

    For each step the reward increment must lie in
    [dq2/theta_k, dq2/theta_{k-1}] with dq2 = q_k^2 - q_{k-1}^2; the window is
    nonempty exactly because q is monotone and the ladder ascends. The bottom
    reward gets a nonnegative participation slack.
    """
    k = int(rng.integers(1, k_max + 1))
    profile = random_ladder(rng, k)
    thetas = profile.as_array()
    q = np.cumsum(rng.uniform(0.0, 1.0, size=k))
    if rng.random() < 0.2:
        q[0] = 0.0
    pi = np.empty(k)
    pi[0] = q[0] ** 2 / thetas[0] + rng.uniform(0.0, ir_slack_max)
    for i in range(1, k):
        dq2 = q[i] ** 2 - q[i - 1] ** 2
        lo = pi[i - 1] + dq2 / thetas[i]
        hi = pi[i - 1] + dq2 / thetas[i - 1]
        pi[i] = lo + rng.random() * (hi - lo)
    return profile, Contract.from_arrays(q, pi)
