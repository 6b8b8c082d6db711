"""Deterministic RNG stream derivation.

Every stochastic stage of a Monte Carlo path (price shocks, noise shocks,
sampling times) draws from its own stream, derived from
(master_seed, scenario_key, path_index, purpose). Streams are independent
of scheduling order and worker count.
"""

from __future__ import annotations

import numpy as np

# purpose tags for per-path sub-streams
PRICE = 0
NOISE = 1
SAMPLING = 2


def path_entropy(master_seed: int, scenario_key: int, path_index: int) -> list[int]:
    return [int(master_seed) & (2**63 - 1), int(scenario_key) & (2**63 - 1), int(path_index)]


def stream(master_seed: int, scenario_key: int, path_index: int, purpose: int) -> np.random.SeedSequence:
    """SeedSequence for one purpose within one path of one scenario."""
    return np.random.SeedSequence(
        entropy=path_entropy(master_seed, scenario_key, path_index),
        spawn_key=(purpose,),
    )


def as_seed_sequence(seed) -> np.random.SeedSequence:
    """Accept an int, a SeedSequence, or None (fresh entropy)."""
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def rng_from(seed) -> np.random.Generator:
    return np.random.default_rng(as_seed_sequence(seed))
