"""Order-preserving map over sample points, capped by PARALEX_THREADS."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

ENV_VAR = "PARALEX_THREADS"


def thread_count() -> int:
    """Worker cap from the environment; 0 means run serially."""
    raw = os.environ.get(ENV_VAR)
    if raw is None or raw.strip() == "":
        return min(4, os.cpu_count() or 1)
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{ENV_VAR} must be an integer, got {raw!r}") from None
    return max(0, n)


def pmap(fn, items):
    items = list(items)
    workers = thread_count()
    if workers <= 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))
