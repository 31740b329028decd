"""Deterministic fan-out of independent tasks.

Every task receives its own seed derived from one master seed, so the
results do not depend on how many worker processes run them.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Sequence

import numpy as np


def child_seeds(master: int, count: int) -> list[int]:
    """``count`` independent 63-bit seeds spawned from ``master``."""
    kids = np.random.SeedSequence(master).spawn(count)
    return [int(k.generate_state(2, dtype=np.uint32).view(np.uint64)[0] >> 1) for k in kids]


def pmap(fn: Callable, args: Sequence, jobs: int = 1) -> list:
    """Ordered map; ``jobs > 1`` uses a process pool (``fn`` must be picklable)."""
    if jobs < 1:
        raise ValueError("jobs must be positive")
    if jobs == 1 or len(args) <= 1:
        return [fn(a) for a in args]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, args))
