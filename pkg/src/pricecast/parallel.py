"""Order-preserving process-pool map."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor


def parallel_map(func, items, n_jobs: int = 1, chunksize: int = 1) -> list:
    """``[func(x) for x in items]``, optionally across ``n_jobs`` processes.

    Results come back in input order, so serial and parallel runs agree
    whenever ``func`` is deterministic in its argument.
    """
    items = list(items)
    if n_jobs is None or n_jobs <= 1 or len(items) <= 1:
        return [func(x) for x in items]
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(func, items, chunksize=chunksize))
