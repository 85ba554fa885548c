from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor


def max_workers() -> int:
    try:
        n = int(os.environ.get("OSCULUM_THREADS", "1"))
    except ValueError:
        n = 1
    return max(1, n)


def pmap(fn, items: list, chunksize: int = 4) -> list:
    """Order-preserving map; uses processes when OSCULUM_THREADS > 1."""
    n = max_workers()
    if n == 1 or len(items) < 2:
        return [fn(*it) for it in items]
    with ProcessPoolExecutor(max_workers=n) as ex:
        return list(ex.map(_star, [(fn, it) for it in items], chunksize=chunksize))


def _star(job):
    fn, args = job
    return fn(*args)
