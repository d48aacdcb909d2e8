"""Deterministic random substreams and block-parallel Monte Carlo plumbing.

Every Monte Carlo loop is cut into fixed-size blocks of paths. Block ``k`` of
purpose ``tag`` draws from a Philox generator keyed by ``(seed, tag, k)``, so
a result depends only on the seed and the block size, never on how many
threads process the blocks.
"""
from __future__ import annotations

import os
import zlib
from concurrent.futures import ThreadPoolExecutor

import numpy as np

BLOCK_SIZE = 8192


def tag_id(tag: str) -> int:
    return zlib.crc32(tag.encode("utf-8"))


def substream(seed: int, tag: str, index: int = 0) -> np.random.Generator:
    """Generator for path-block ``index`` of purpose ``tag``."""
    ss = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1), spawn_key=(tag_id(tag), int(index)))
    return np.random.Generator(np.random.Philox(ss))


def thread_count() -> int:
    raw = os.environ.get("CATBOND_THREADS")
    if raw:
        try:
            n = int(raw)
        except ValueError:
            raise ValueError(f"CATBOND_THREADS must be an integer, got {raw!r}") from None
        return max(1, n)
    return os.cpu_count() or 1


def block_sizes(n_paths: int, block_size: int = BLOCK_SIZE) -> list[int]:
    full, rest = divmod(int(n_paths), block_size)
    return [block_size] * full + ([rest] if rest else [])


def map_blocks(fn, n_paths: int, block_size: int = BLOCK_SIZE, threads: int | None = None):
    """Apply ``fn(block_index, n_in_block)`` to every block; results in block order."""
    sizes = block_sizes(n_paths, block_size)
    threads = thread_count() if threads is None else threads
    if threads <= 1 or len(sizes) <= 1:
        return [fn(k, n) for k, n in enumerate(sizes)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(len(sizes)), sizes))


def mean_and_se(block_sums: list[np.ndarray], block_sumsq: list[np.ndarray], n: int):
    """Combine per-block sums (in block order) into a mean and standard error."""
    s = np.sum(np.stack(block_sums), axis=0)
    s2 = np.sum(np.stack(block_sumsq), axis=0)
    mean = s / n
    var = np.maximum(s2 / n - mean**2, 0.0) * n / max(n - 1, 1)
    return mean, np.sqrt(var / n)
