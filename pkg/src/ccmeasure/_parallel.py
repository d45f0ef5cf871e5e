import os
from concurrent.futures import ThreadPoolExecutor


def max_threads():
    try:
        return max(1, int(os.environ.get("CC_MEASURE_THREADS", "1")))
    except ValueError:
        return 1


def parallel_map(fn, items):
    """``list(map(fn, items))``, threaded up to CC_MEASURE_THREADS; order kept."""
    items = list(items)
    n = min(max_threads(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
