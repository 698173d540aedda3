"""Thread-pool plumbing with thread-count independent results.

Work is cut into a fixed list of tiles that does not depend on the number
of workers; each tile writes its own output slot and BLAS is pinned to one
thread while tiles run, so the floating point summation order is the same
for any ``QGABOR_THREADS`` setting.
"""

from __future__ import annotations

import os
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from typing import TypeVar

from threadpoolctl import threadpool_limits

T = TypeVar("T")
R = TypeVar("R")

ENV_VAR = "QGABOR_THREADS"


def n_threads() -> int:
    raw = os.environ.get(ENV_VAR, "")
    if raw.strip():
        try:
            n = int(raw)
        except ValueError:
            raise ValueError(f"{ENV_VAR} must be a positive integer, got {raw!r}") from None
        if n < 1:
            raise ValueError(f"{ENV_VAR} must be a positive integer, got {raw!r}")
        return n
    return min(8, os.cpu_count() or 1)


@contextmanager
def single_threaded_blas():
    with threadpool_limits(limits=1):
        yield


def tile_map(fn: Callable[[T], R], tiles: Iterable[T]) -> list[R]:
    """Apply ``fn`` to every tile, in order, using up to ``n_threads()`` workers."""
    tiles = list(tiles)
    workers = min(n_threads(), len(tiles))
    with single_threaded_blas():
        if workers <= 1:
            return [fn(t) for t in tiles]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, tiles))


def chunks(n: int, size: int) -> Sequence[slice]:
    return [slice(s, min(s + size, n)) for s in range(0, n, size)]
