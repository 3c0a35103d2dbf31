"""Deterministic fan-out over worker processes.

Results always come back in task order, so any associative merge performed
by the caller is independent of the worker count.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, TypeVar

T = TypeVar("T")
R = TypeVar("R")

ENV_THREADS = "HYPERCOUNT_THREADS"


def resolve_workers(requested: int | None = None) -> int:
    """Worker count: ``requested`` (default 1) capped by ``$HYPERCOUNT_THREADS``."""
    n = 1 if requested is None else int(requested)
    cap = os.environ.get(ENV_THREADS)
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, n)


def pmap(func: Callable[[T], R], tasks: Iterable[T], workers: int = 1) -> list[R]:
    tasks = list(tasks)
    workers = resolve_workers(workers)
    if workers <= 1 or len(tasks) <= 1:
        return [func(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
        return list(pool.map(func, tasks))
