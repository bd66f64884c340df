"""Order-preserving parallel map and fixed-shape tree reductions.

Work is split into chunks whose boundaries depend only on the input size, so
results are identical for any worker count.  The worker count comes from the
``PSWORKBENCH_WORKERS`` environment variable (default 1).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")
R = TypeVar("R")

WORKERS_ENV = "PSWORKBENCH_WORKERS"
CHUNK = 1 << 18


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def ordered_map(fn: Callable[[T], R], items: Sequence[T], workers: int | None = None) -> list[R]:
    """``[fn(x) for x in items]``, possibly evaluated on a thread pool."""
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def chunk_slices(n: int, chunk: int = CHUNK) -> list[slice]:
    return [slice(i, min(i + chunk, n)) for i in range(0, n, chunk)] or [slice(0, 0)]


def tree_sum(parts: list[np.ndarray]) -> np.ndarray:
    """Pairwise sum of equally shaped arrays in a fixed bracket order."""
    parts = list(parts)
    while len(parts) > 1:
        nxt = [parts[i] + parts[i + 1] for i in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            nxt.append(parts[-1])
        parts = nxt
    return parts[0]


def binned_sum(index: np.ndarray, weights: np.ndarray, length: int) -> np.ndarray:
    """``np.bincount`` over fixed chunks, merged by :func:`tree_sum`."""
    slices = chunk_slices(len(index))
    parts = ordered_map(lambda sl: np.bincount(index[sl], weights=weights[sl], minlength=length), slices)
    return tree_sum(parts)
