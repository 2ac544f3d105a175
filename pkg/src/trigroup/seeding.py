"""Counter-based random streams.

Every random quantity is a pure function of a 64-bit master seed and integer
coordinates (trial index, stream tag, slot rank), so serial and parallel runs
see identical numbers.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def derive_seed(seed: int, *coords: int) -> int:
    """Child seed for ``coords`` under ``seed``."""
    ss = np.random.SeedSequence([int(seed) & _MASK64, *(int(c) for c in coords)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def slot_uniforms(seed: int, count: int) -> np.ndarray:
    """``count`` uniforms on [0, 1); entry ``i`` depends only on ``(seed, i)``.

    Philox is counter based: the i-th output is a function of the key and the
    counter, independent of how many values are requested.
    """
    gen = np.random.Generator(np.random.Philox(key=int(seed) & _MASK64))
    return gen.random(count)


def rng(seed: int, *coords: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=derive_seed(seed, *coords)))
