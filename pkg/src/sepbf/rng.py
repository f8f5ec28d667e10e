"""Counter-based random substreams.

Every random quantity is drawn from a Philox4x64 generator keyed by
``SeedSequence([seed, stream, block])``. ``stream`` separates independent
consumers (restarts, Bob vs Eve noise, ...) and ``block`` indexes fixed-size
chunks of draws, so results never depend on how work is split across
threads.
"""

from __future__ import annotations

import numpy as np

BLOCK = 1 << 14


def substream(seed: int, *index: int) -> np.random.Generator:
    """Generator for the substream ``(seed, *index)``."""
    key = [int(seed) & 0xFFFFFFFFFFFFFFFF, *(int(i) for i in index)]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


def blocks(total: int, block: int = BLOCK):
    """Yield ``(block_index, start, size)`` covering ``range(total)``."""
    for b, start in enumerate(range(0, total, block)):
        yield b, start, min(block, total - start)
