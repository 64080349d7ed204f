"""Seeded random streams and samplers.

Every stochastic routine draws from fixed-size chunks; chunk ``c`` of a run
with seed ``s`` uses ``numpy.random.default_rng([s, c])``.  Work is split
across processes by chunk, so results never depend on the worker count, and
a run with more trials extends (never changes) a run with fewer.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

from .words import Word, reduce

CHUNK = 1000

T = TypeVar("T")


def chunk_rng(seed: int, chunk: int, stream: int = 0) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(stream), int(chunk)])


def chunk_sizes(total: int, chunk: int = CHUNK) -> list[int]:
    full, rest = divmod(int(total), chunk)
    return [chunk] * full + ([rest] if rest else [])


def run_chunks(fn: Callable[..., T], args: Sequence[tuple], workers: int = 1) -> list[T]:
    """Map ``fn`` over argument tuples, preserving order."""
    if workers is None or workers <= 1 or len(args) <= 1:
        return [fn(*a) for a in args]
    with ProcessPoolExecutor(max_workers=min(workers, os.cpu_count() or 1, len(args))) as ex:
        futures = [ex.submit(fn, *a) for a in args]
        return [f.result() for f in futures]


def random_word(rng: np.random.Generator, rank: int, length: int) -> Word:
    """Uniform freely reduced word of exactly ``length`` letters."""
    if length <= 0:
        return Word(())
    letters = []
    prev = 0
    for _ in range(length):
        while True:
            g = int(rng.integers(1, rank + 1))
            x = g if rng.random() < 0.5 else -g
            if x != -prev:
                break
        letters.append(x)
        prev = x
    return reduce(letters)


def random_words(rng: np.random.Generator, rank: int, max_len: int, n: int) -> Iterable[Word]:
    for _ in range(n):
        yield random_word(rng, rank, int(rng.integers(0, max_len + 1)))
