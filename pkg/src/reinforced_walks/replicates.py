"""Replicate-level fan-out.

Every replicate draws from its own counter-based stream, so splitting the
index range across threads cannot change any value; chunks are reassembled
in index order.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

THREADS_ENV = "REINFORCED_WALKS_THREADS"


def default_threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None


def run_replicates(fn, count: int, threads: int | None = None):
    """Call ``fn(first, size)`` over ``[0, count)`` and concatenate the results.

    ``fn`` returns an array or a tuple of arrays for its chunk.  It must only
    touch per-call state (the kernels it wraps release the GIL).
    """
    threads = default_threads() if threads is None else max(1, int(threads))
    if threads == 1 or count < 2 * threads:
        return fn(0, count)
    bounds = np.linspace(0, count, threads + 1).astype(int)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda a: fn(a[0], a[1] - a[0]), zip(bounds[:-1], bounds[1:])))
    if isinstance(parts[0], tuple):
        return tuple(np.concatenate(cols) for cols in zip(*parts))
    return np.concatenate(parts)
