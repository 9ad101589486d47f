"""Deterministic reductions and the thread pool used for grid sweeps."""
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np


def pairwise_sum(values, axis=-1):
    """Sum along ``axis`` with a fixed binary tree.

    The array is zero-padded to a power of two and adjacent pairs are added
    level by level, so the result depends only on the values, never on how
    they were produced or chunked.
    """
    x = np.moveaxis(np.asarray(values, dtype=np.float64), axis, -1)
    n = x.shape[-1]
    if n == 0:
        return np.zeros(x.shape[:-1])
    size = 1 << (n - 1).bit_length()
    if size != n:
        pad = np.zeros(x.shape[:-1] + (size - n,))
        x = np.concatenate([x, pad], axis=-1)
    while x.shape[-1] > 1:
        x = x[..., 0::2] + x[..., 1::2]
    return x[..., 0]


def pairwise_mean(values, axis=-1):
    x = np.asarray(values, dtype=np.float64)
    return pairwise_sum(x, axis) / x.shape[axis]


def thread_count(threads=None):
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get("QPS_THREADS")
    if env:
        return max(1, int(env))
    return 1


def map_row_chunks(fn, n_rows, threads=None):
    """Apply ``fn(lo, hi)`` over contiguous row blocks and stack results along the last axis.

    Blocks are reassembled in row order, so the output is independent of the
    number of worker threads.
    """
    workers = thread_count(threads)
    if workers == 1 or n_rows < 2 * workers:
        return fn(0, n_rows)
    bounds = np.linspace(0, n_rows, workers + 1).astype(int)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda b: fn(b[0], b[1]), zip(bounds[:-1], bounds[1:])))
    return np.concatenate(parts, axis=-1)
