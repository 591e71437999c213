"""Small shared helpers: dB conversion, angle folding, capped thread pool."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor

THREADS_ENV = "FDSQ_THREADS"


def db(variance: float) -> float:
    """Variance relative to shot noise, in dB (vacuum = 0 dB)."""
    return 10.0 * math.log10(variance)


def from_db(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


def fold_pi(angle: float) -> float:
    """Fold a quadrature angle into [0, pi)."""
    return angle % math.pi


def angle_distance_mod_pi(a: float, b: float) -> float:
    """Distance between two quadrature angles on the mod-pi circle, in [0, pi/2]."""
    return abs(math.remainder(a - b, math.pi))


def thread_count() -> int:
    """Parallelism cap from the FDSQ_THREADS environment variable (default 1)."""
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def parallel_map(fn, items):
    """Map `fn` over `items`, in order.

    Points are independent, so threaded evaluation returns results
    bit-identical to the sequential loop; only the wall time changes.
    """
    items = list(items)
    n = thread_count()
    if n <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
