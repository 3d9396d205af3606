# src/core/threads.py
"""Thread-pool helpers whose results never depend on scheduling order."""
import logging
import os
from concurrent.futures import ThreadPoolExecutor, as_completed

logger = logging.getLogger('tmss')


def default_workers():
    return min(8, os.cpu_count() or 1)


def ordered_map(fn, items, max_workers = None):
    """[fn(x) for x in items] evaluated on a thread pool, results in input order.

    The first exception raised by any task is re-raised after the pool shuts down.
    """
    items = list(items)
    if not items:
        return []
    workers = max_workers or default_workers()
    if workers <= 1 or len(items) == 1:
        return [fn(item) for item in items]

    results = [None] * len(items)
    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = {executor.submit(fn, item): index for index, item in enumerate(items)}
        for future in as_completed(futures):
            index = futures[future]
            try:
                results[index] = future.result()
            except Exception:
                logger.debug(f"Task {index} of {len(items)} failed")
                for pending in futures:
                    pending.cancel()
                raise
    return results


def max_reduce(fn, items, max_workers = None):
    """(index, value) of the largest fn(x); ties go to the lowest index."""
    values = ordered_map(fn, items, max_workers)
    if not values:
        raise ValueError("max_reduce needs at least one item")
    best = 0
    for index, value in enumerate(values):
        if value > values[best]:
            best = index
    return best, values[best]
