"""Thread-count control and order-fixed reductions.

Work is always split into the same fixed chunks, whatever the worker count,
and partial results are combined by a pairwise tree in index order. Outputs
are therefore bit-identical for 1, 2 or 64 threads.
"""

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

CHUNK = 2048
_ENV = "STEINER_THREADS"


def worker_count():
    """Number of worker threads, capped by ``STEINER_THREADS`` if set."""
    default = min(8, os.cpu_count() or 1)
    raw = os.environ.get(_ENV)
    if raw is None or raw.strip() == "":
        return default
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"{_ENV} must be a positive integer, got {raw!r}")
    return n


def chunk_bounds(n_items, chunk=CHUNK):
    return [(s, min(s + chunk, n_items)) for s in range(0, n_items, chunk)]


def map_chunks(func, n_items, chunk=CHUNK):
    """Call ``func(start, stop)`` on fixed chunks of ``range(n_items)``.

    Results come back in chunk order. ``func`` must only write to disjoint
    output regions.
    """
    bounds = chunk_bounds(n_items, chunk)
    workers = min(worker_count(), len(bounds))
    if workers <= 1:
        return [func(s, e) for s, e in bounds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda b: func(*b), bounds))


def tree_sum(values):
    """Pairwise sum of a 1-D array in a fixed bracketing."""
    a = np.asarray(values, dtype=np.float64).ravel()
    if a.size == 0:
        return 0.0
    while a.size > 1:
        if a.size % 2:
            a = np.append(a, 0.0)
        a = a[0::2] + a[1::2]
    return float(a[0])


def column_sums(cols):
    """Per-row sums of a 2-D array, computed chunk by chunk.

    Each row is reduced by the same numpy call regardless of which chunk it
    lands in, so the vector of sums does not depend on the thread count.
    """
    cols = np.ascontiguousarray(cols, dtype=np.float64)
    out = np.empty(cols.shape[0])

    def work(s, e):
        out[s:e] = cols[s:e].sum(axis=1)

    map_chunks(work, cols.shape[0])
    return out
