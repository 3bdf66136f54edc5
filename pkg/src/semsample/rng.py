"""Seeded random number streams.

All randomness in this package flows through Philox-4x64-10, a counter-based
64-bit generator, so that a stored integer seed reproduces the same stream on
every platform. Independent streams for one seed are derived by feeding
``(seed, *stream)`` into a ``SeedSequence``.
"""

from __future__ import annotations

import numpy as np

# Stream tags; part of the reproducibility contract, do not renumber.
SCENE_STREAM = 0
ORACLE_STREAM = 1
VOXEL_STREAM = 2
INIT_STREAM = 3


def philox(seed: int, *stream: int) -> np.random.Generator:
    """Return a Philox generator keyed by ``seed`` and an optional stream tag."""
    return np.random.Generator(np.random.Philox(seed=np.random.SeedSequence((seed, *stream))))
