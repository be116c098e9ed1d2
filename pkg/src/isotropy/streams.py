"""Seeded, chunked random streams shared by all Monte Carlo estimators.

Samples are cut into fixed-size chunks and chunk ``c`` always draws from the
stream ``SeedSequence(seed, spawn_key=(c,))``.  Workers take whole chunks, so
estimates do not depend on how many workers ran.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

CHUNK = 4096
THREADS_ENV = "ISOTROPY_THREADS"


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(chunk,)))


def chunk_sizes(samples: int) -> list[int]:
    full, rest = divmod(samples, CHUNK)
    return [CHUNK] * full + ([rest] if rest else [])


def run_chunks(worker: Callable, args: tuple, samples: int, seed: int, workers: int | None = None) -> list:
    """Call ``worker(*args, seed, chunk_index, size)`` for every chunk, in chunk order."""
    sizes = chunk_sizes(samples)
    jobs = [(*args, seed, c, size) for c, size in enumerate(sizes)]
    workers = workers or default_workers()
    if workers <= 1 or len(jobs) <= 1:
        return [worker(*job) for job in jobs]
    with ProcessPoolExecutor(workers) as ex:
        return list(ex.map(_star, [(worker, job) for job in jobs]))


def _star(item):
    fn, job = item
    return fn(*job)


@dataclass(frozen=True)
class Estimate:
    hits: int
    samples: int

    @property
    def value(self) -> float:
        return self.hits / self.samples

    @property
    def stderr(self) -> float:
        q = self.value
        return (q * (1 - q) / self.samples) ** 0.5
