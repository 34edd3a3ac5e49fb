"""
Block-parallel execution for the Monte Carlo engine.

Work is split into numbered blocks. Every block draws from its own stream,
``default_rng(SeedSequence(seed, spawn_key=(stream, block)))``, and results
come back in block order, so the reduction a caller performs over them is
the same for any number of workers.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional

import numpy as np
from tqdm import tqdm


logger = logging.getLogger(__name__)


def block_rng(seed: int, stream: int, block: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream, block)))


def block_sizes(trials: int, block_size: int) -> list:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    full, rest = divmod(trials, block_size)
    return [block_size] * full + ([rest] if rest else [])


def map_blocks(
    fn: Callable[[int], object],
    n_blocks: int,
    workers: int = 1,
    progress: bool = False,
    desc: Optional[str] = None,
) -> list:
    """fn(block_index) for every block; results in block order."""
    bar = tqdm(total=n_blocks, desc=desc, disable=not progress, leave=False)
    try:
        if workers <= 1 or n_blocks <= 1:
            results = []
            for i in range(n_blocks):
                results.append(fn(i))
                bar.update(1)
            return results
        logger.debug(f"Dispatching {n_blocks} blocks to {workers} workers")
        with ThreadPoolExecutor(max_workers=workers, thread_name_prefix="Sampler") as pool:
            futures = [pool.submit(fn, i) for i in range(n_blocks)]
            results = []
            for fut in futures:
                results.append(fut.result())
                bar.update(1)
            return results
    finally:
        bar.close()
