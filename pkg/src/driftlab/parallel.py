"""Replicate-loop parallelism capped by the DRIFTLAB_THREADS environment variable.

Each replicate derives its random stream from (seed, replicate index), so the
result of mapping over replicates is the same for any worker count; the env
var only bounds resource use.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def thread_limit() -> int:
    raw = os.environ.get("DRIFTLAB_THREADS", "")
    if raw:
        n = int(raw)
        if n < 1:
            raise ValueError("DRIFTLAB_THREADS must be a positive integer")
        return n
    return os.cpu_count() or 1


def map_replicates(fn, n: int) -> list:
    """[fn(0), ..., fn(n-1)], evaluated with at most thread_limit() workers."""
    workers = min(thread_limit(), max(n, 1))
    if workers == 1 or n <= 1:
        return [fn(r) for r in range(n)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(n)))
