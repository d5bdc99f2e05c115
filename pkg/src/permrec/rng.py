"""Counter-based random streams.

Every Monte Carlo routine draws from a :class:`Stream`. A stream is a seed
plus a tuple key; work is cut into fixed-size blocks and block ``k`` gets its
own Philox generator keyed by ``(seed, *key, k)``. Because the block layout
depends only on the trial count, results do not depend on how many workers
process the blocks.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, TypeVar

import numpy as np

T = TypeVar("T")

SEED_MASK = (1 << 64) - 1
THREADS_ENV = "PERMREC_THREADS"


@dataclass(frozen=True)
class Stream:
    seed: int
    key: tuple[int, ...] = ()

    def __post_init__(self):
        if not 0 <= int(self.seed) <= SEED_MASK:
            raise ValueError(f"seed must fit in 64 bits, got {self.seed}")

    def child(self, *key: int) -> "Stream":
        """Independent sub-stream, e.g. one per grid point or per coefficient."""
        return Stream(self.seed, self.key + tuple(int(k) for k in key))

    def generator(self, block: int = 0) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=self.key + (int(block),))
        return np.random.Generator(np.random.Philox(ss))


def as_stream(rng: Stream | int | None) -> Stream:
    if isinstance(rng, Stream):
        return rng
    if rng is None:
        return Stream(fresh_seed())
    return Stream(int(rng))


def fresh_seed() -> int:
    return int(np.random.SeedSequence().entropy) & SEED_MASK


def resolve_threads(threads: int | None = None) -> int:
    if threads is None:
        threads = int(os.environ.get(THREADS_ENV, "1") or 1)
    return max(1, int(threads))


def block_sizes(total: int, block: int) -> list[int]:
    full, rest = divmod(int(total), int(block))
    return [block] * full + ([rest] if rest else [])


def map_blocks(
    fn: Callable[[int, int], T], total: int, block: int, threads: int | None = None
) -> list[T]:
    """Apply ``fn(block_index, block_size)`` to every block, results in block order."""
    sizes = block_sizes(total, block)
    workers = min(resolve_threads(threads), max(1, len(sizes)))
    if workers == 1:
        return [fn(k, s) for k, s in enumerate(sizes)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(len(sizes)), sizes))


def derive_seed(seed: int, *key: int) -> int:
    """A 64-bit seed for an independent child experiment."""
    words = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key)).generate_state(
        2, np.uint32
    )
    return (int(words[0]) << 32) | int(words[1])
