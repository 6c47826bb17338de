"""Seeded random streams.

Every consumer draws from its own counter-based Philox stream derived from
the single experiment seed, so adding or reordering consumers never shifts
another consumer's numbers.
"""

import numpy as np

# stream ids; never renumber, outputs depend on them
SCATTER = 1
PRECODERS = 2
SYMBOLS = 3
NOISE = 4
PERTURB = 5


def stream(seed: int, *keys: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(ss))


def complex_normal(rng: np.random.Generator, shape, power: float = 1.0) -> np.ndarray:
    """Circularly-symmetric complex Gaussian with E|z|^2 = power."""
    scale = np.sqrt(power / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
