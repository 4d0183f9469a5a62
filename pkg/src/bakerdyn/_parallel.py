from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def default_threads() -> int:
    return os.cpu_count() or 1


def parallel_map(fn, items, threads: int = 1) -> list:
    """Ordered map over ``items``; results come back in input order regardless of ``threads``."""
    items = list(items)
    if threads is None or threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
