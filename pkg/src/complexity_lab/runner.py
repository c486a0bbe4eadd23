"""Seeded per-trial random streams and the trial worker pool."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, TypeVar

import numpy as np

from .errors import InvalidArgumentError

T = TypeVar("T")

THREADS_ENV = "COMPLEXITY_LAB_THREADS"
RNG_NAME = f"numpy.random.PCG64/SeedSequence(seed,spawn_key=(trial,)) numpy={np.__version__}"


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent generator for ``trial``; depends only on ``(seed, trial)``."""
    if seed < 0 or seed >= 2**64:
        raise InvalidArgumentError(f"seed must be a 64-bit unsigned integer, got {seed}")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(trial),))
    return np.random.Generator(np.random.PCG64(ss))


def resolve_workers(requested: int | None = None) -> int:
    """Worker count: ``requested`` (or the CPU count), capped by ``COMPLEXITY_LAB_THREADS``."""
    workers = requested if requested is not None else (os.cpu_count() or 1)
    cap = os.environ.get(THREADS_ENV)
    if cap:
        try:
            workers = min(workers, int(cap))
        except ValueError as exc:
            raise InvalidArgumentError(f"{THREADS_ENV} must be an integer, got {cap!r}") from exc
    return max(1, int(workers))


def map_trials(fn: Callable[[int], T], trials: int, workers: int | None = None) -> list[T]:
    """``[fn(0), ..., fn(trials - 1)]``, computed on up to ``workers`` processes.

    Results come back in trial order whatever the pool size, so output built
    from them is identical for any worker count.
    """
    workers = min(resolve_workers(workers), trials)
    if workers <= 1:
        return [fn(t) for t in range(trials)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(trials)))
