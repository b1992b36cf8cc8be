"""
Counter-based random streams. Paths are grouped in blocks of BLOCK_SIZE
consecutive indices; every block owns a Philox key derived from (seed, block),
so an ensemble depends only on (seed, path index) and never on scheduling.
"""
from typing import Iterator

import numpy as np

from harnack_lab.errors import ArgumentError

BLOCK_SIZE = 4096

# stream ids separating independent uses of one seed
STREAM_PATHS = 0
STREAM_TRANSFORMED = 1
STREAM_REFERENCE = 2
STREAM_RESTART = 3


def block_generator(seed: int, block: int, stream: int = STREAM_PATHS) -> np.random.Generator:
    if not 0 <= seed < 2 ** 64:
        raise ArgumentError(f"seed must be a 64-bit unsigned integer, got {seed}")
    key = (seed << 64) | block
    return np.random.Generator(np.random.Philox(key=key, counter=[0, 0, 0, stream]))


def blocks(count: int) -> Iterator[tuple[int, int, int]]:
    """(block index, first path, one past last path)"""
    for b, start in enumerate(range(0, count, BLOCK_SIZE)):
        yield b, start, min(start + BLOCK_SIZE, count)


def derive_seed(seed: int, *indices: int) -> int:
    """Independent child seed for a sweep instance."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(indices))
    return int(ss.generate_state(1, np.uint64)[0])
