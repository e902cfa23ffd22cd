"""Order-preserving worker pool over independent sweep points."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
import os


def ordered_map(fn, items, workers: int = 1):
    """``[fn(x) for x in items]``, optionally spread over ``workers`` processes.

    ``fn`` must be a module-level callable. Output order always follows
    ``items``, so serial and parallel runs produce identical results.
    """
    items = list(items)
    if workers is None or workers <= 0:
        workers = os.cpu_count() or 1
    if workers == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))
