"""Counter-based uniform streams keyed by ``(seed, sample_index)``.

Sample ``i`` of a stream is always the ``i``-th 64-bit word of a Philox4x64
generator keyed by ``seed``, however the index range is chunked, which is
what makes parallel Monte Carlo runs reproducible.
"""
from __future__ import annotations

import numpy as np

_WORDS_PER_COUNTER = 4


def raw_words(seed: int, start: int, count: int) -> np.ndarray:
    if start < 0 or count < 0:
        raise ValueError("start and count must be non-negative")
    skip = start % _WORDS_PER_COUNTER
    bg = np.random.Philox(key=int(seed), counter=start // _WORDS_PER_COUNTER)
    return bg.random_raw(count + skip)[skip:]


def open_uniform(seed: int, start: int, count: int) -> np.ndarray:
    """Doubles strictly inside (0, 1) for sample indices ``start .. start+count-1``."""
    words = raw_words(seed, start, count)
    return ((words >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def chunk_ranges(total: int, chunk: int = 4096):
    return [(s, min(chunk, total - s)) for s in range(0, total, chunk)]
