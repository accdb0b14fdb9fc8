"""Seeded randomness and small statistics helpers.

Every Monte Carlo trial owns an independent Philox4x64-10 stream keyed by
``(root seed, trial index)``. Philox is counter based with published round
constants, so a trial's draws do not depend on which worker runs it or in
what order trials are aggregated.
"""

from __future__ import annotations

import math
import os
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from typing import TypeVar

import numpy as np

_MASK64 = (1 << 64) - 1
Z95 = 1.959963984540054

T = TypeVar("T")
R = TypeVar("R")


def trial_rng(seed: int, index: int) -> np.random.Generator:
    """Generator for trial ``index`` under root ``seed``."""
    return np.random.Generator(np.random.Philox(key=[seed & _MASK64, index & _MASK64]))


def random_subset(rng: np.random.Generator, pool: Sequence[int] | np.ndarray, k: int) -> np.ndarray:
    """Uniform ``k``-subset of ``pool`` (sorted)."""
    pool = np.asarray(pool)
    if k >= len(pool):
        return np.sort(pool)
    return np.sort(rng.choice(pool, size=k, replace=False))


def wilson_interval(successes: int, trials: int, z: float = Z95) -> tuple[float, float]:
    if trials <= 0:
        return 0.0, 1.0
    phat = successes / trials
    denom = 1 + z * z / trials
    centre = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def mean_interval(values: Sequence[float] | np.ndarray, z: float = Z95) -> tuple[float, float, float]:
    """Sample mean with a normal-approximation confidence interval."""
    x = np.asarray(values, dtype=float)
    mean = float(x.mean())
    if len(x) < 2:
        return mean, mean, mean
    half = z * float(x.std(ddof=1)) / math.sqrt(len(x))
    return mean, mean - half, mean + half


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("SPREADLAB_THREADS", "1")))
    except ValueError:
        return 1


def pmap(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    """Order-preserving map, fanned out over ``SPREADLAB_THREADS`` processes."""
    items = list(items)
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
