"""Seeded random streams.

All randomness goes through numpy's Philox generator, a 64-bit counter-based
bit generator, so a seed reproduces the same stream on every platform. There
is no module-level generator; every caller passes its seed explicitly.
"""

from typing import List

import numpy as np


def make_generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed)))


def spawn_seeds(master_seed: int, count: int, stream: int = 0) -> List[int]:
    """Derive `count` independent integer seeds from a master seed.

    `stream` separates unrelated consumers (e.g. sampling vs projections) so
    they never share child seeds.
    """
    root = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(stream),))
    return [int(child.generate_state(1, dtype=np.uint64)[0]) for child in root.spawn(count)]
