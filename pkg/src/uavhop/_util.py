from concurrent.futures import ThreadPoolExecutor

import numpy as np


def frozen_array(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def ordered_map(fn, items, threads=1):
    """``map`` that may run on a thread pool but always returns input order."""
    items = list(items)
    if threads is None or threads <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
