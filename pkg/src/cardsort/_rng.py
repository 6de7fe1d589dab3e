"""Deterministic random streams.

Every stochastic routine derives its generator from ``(seed, *keys)`` with
:class:`numpy.random.SeedSequence` feeding a PCG64 bit generator.  The keys
name the unit of work (participant index, permutation index, resample size
and iteration), so results do not depend on execution order or thread count.
"""

import numpy as np


def substream(seed: int, *keys: int) -> np.random.Generator:
    if seed < 0 or any(k < 0 for k in keys):
        raise ValueError("seed and stream keys must be non-negative integers")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), *map(int, keys)])))
