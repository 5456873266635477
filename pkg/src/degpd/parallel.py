"""Deterministic task fan-out.

Each task draws from its own generator keyed on ``(seed, stream, index)``
so results do not depend on how many workers run them. Results are
returned in task order.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")
R = TypeVar("R")

# stream identifiers keep the studies' random streams disjoint
STREAM_BOOTSTRAP = 1
STREAM_KS = 2
STREAM_RECOVERY = 3
STREAM_SWEEP = 4
STREAM_ENVELOPE = 5


def task_rng(seed: int, stream: int, index: int) -> np.random.Generator:
    if seed < 0:
        raise ValueError("seeds must be non-negative")
    return np.random.default_rng([int(seed), int(stream), int(index)])


def pmap(fn: Callable[[T], R], items: Iterable[T], jobs: int = 1) -> list[R]:
    items: Sequence[T] = list(items)
    if jobs is None or jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    chunk = max(1, len(items) // (4 * jobs))
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items, chunksize=chunk))
