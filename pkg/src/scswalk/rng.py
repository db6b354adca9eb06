"""Seeded counter-based random streams and block-parallel reductions.

Every Monte Carlo routine splits its replicates into fixed-size blocks. Block
``b`` draws from its own Philox stream keyed by ``(seed, tag, b)``, so results
depend only on the seed, never on how many workers process the blocks.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence, TypeVar

import numpy as np

__all__ = ["BLOCK_SIZE", "substream", "block_sizes", "map_blocks", "MCEstimate", "mean_estimate"]

BLOCK_SIZE = 4096

T = TypeVar("T")


def substream(seed: int, *ids: int) -> np.random.Generator:
    """Independent generator for the stream indexed by ``ids`` under ``seed``."""
    if seed < 0:
        raise ValueError("seed must be non-negative")
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF, *[int(i) for i in ids]]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def block_sizes(n: int, block: int = BLOCK_SIZE) -> list[int]:
    if n <= 0:
        raise ValueError("number of replicates must be positive")
    full, rest = divmod(n, block)
    return [block] * full + ([rest] if rest else [])


def map_blocks(fn: Callable[[int, int], T], n: int, threads: int = 1, block: int = BLOCK_SIZE) -> list[T]:
    """Apply ``fn(block_index, block_size)`` to every block, results in block order."""
    sizes = block_sizes(n, block)
    if threads <= 1 or len(sizes) == 1:
        return [fn(b, s) for b, s in enumerate(sizes)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(len(sizes)), sizes))


@dataclass(frozen=True)
class MCEstimate:
    """Sample mean with its standard error."""

    mean: float
    stderr: float
    n: int

    def covers(self, target: float, sigmas: float = 4.0, slack: float = 1e-12) -> bool:
        return abs(self.mean - target) <= sigmas * self.stderr + slack

    def z_score(self, target: float) -> float:
        if self.stderr == 0:
            return 0.0 if self.mean == target else math.inf
        return (self.mean - target) / self.stderr


def mean_estimate(block_sums: Sequence[float], block_sq_sums: Sequence[float], n: int) -> MCEstimate:
    """Combine per-block sums in fixed order into a mean and its standard error."""
    total = math.fsum(block_sums)
    total_sq = math.fsum(block_sq_sums)
    mean = total / n
    var = max(total_sq / n - mean * mean, 0.0)
    if n > 1:
        var *= n / (n - 1)
    return MCEstimate(mean, math.sqrt(var / n), n)
