"""Order-preserving trial parallelism.

Work is split into contiguous chunks of trial indices; results come back in
trial order whatever the pool size, so outputs do not depend on ``threads``.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Sequence


def chunks(items: Sequence, parts: int) -> list[Sequence]:
    parts = max(1, min(parts, len(items)))
    size, extra = divmod(len(items), parts)
    out = []
    start = 0
    for i in range(parts):
        stop = start + size + (1 if i < extra else 0)
        out.append(items[start:stop])
        start = stop
    return out


def map_ordered(fn: Callable, items: Sequence, threads: int = 1) -> list:
    """``[fn(x) for x in items]``, optionally spread over ``threads`` processes.

    ``fn`` must be picklable (a module-level function or a ``functools.partial``
    of one).
    """
    if threads < 1:
        raise ValueError("threads must be >= 1")
    if threads == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        parts = pool.map(_apply_all, [(fn, part) for part in chunks(items, threads * 4)])
        return [y for part in parts for y in part]


def _apply_all(job):
    fn, part = job
    return [fn(x) for x in part]
