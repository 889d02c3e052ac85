"""Order-preserving chunked thread pool helpers.

Chunk boundaries depend only on the input length, never on the thread
count, so any reduction over chunk results is identical for every
``threads`` setting.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

CHUNK_SIZE = 8192


def default_threads() -> int:
    return os.cpu_count() or 1


def chunk_bounds(n: int, chunk_size: int = CHUNK_SIZE) -> list[tuple[int, int]]:
    return [(lo, min(lo + chunk_size, n)) for lo in range(0, n, chunk_size)]


def parallel_chunks(fn, n, threads=1, chunk_size=CHUNK_SIZE):
    """Call ``fn(lo, hi)`` for each fixed-size chunk of ``range(n)``; results in chunk order."""
    bounds = chunk_bounds(n, chunk_size)
    if threads is None:
        threads = default_threads()
    if threads <= 1 or len(bounds) <= 1:
        return [fn(lo, hi) for lo, hi in bounds]
    with ThreadPoolExecutor(max_workers=min(threads, len(bounds))) as pool:
        return list(pool.map(lambda b: fn(*b), bounds))


def parallel_map(fn, items, threads=1, chunk_size=CHUNK_SIZE):
    """Apply a list-to-list ``fn`` over fixed-size chunks and concatenate."""
    items = list(items) if not isinstance(items, (list, tuple)) else items
    parts = parallel_chunks(lambda lo, hi: fn(items[lo:hi]), len(items), threads, chunk_size)
    out = []
    for p in parts:
        out.extend(p)
    return out


def tree_sum(parts):
    """Pairwise reduction in a fixed order."""
    parts = list(parts)
    if not parts:
        raise ValueError("nothing to sum")
    while len(parts) > 1:
        nxt = [parts[i] + parts[i + 1] for i in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            nxt.append(parts[-1])
        parts = nxt
    return parts[0]
