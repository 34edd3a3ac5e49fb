"""Threads module for block-parallel sampling."""

from .blocks import block_rng, block_sizes, map_blocks


def create_worker_count_from_config(config) -> int:
    """Worker threads for sampling, at least one."""
    return max(1, int(config.WORKERS))


__all__ = [
    "block_rng",
    "block_sizes",
    "map_blocks",
    "create_worker_count_from_config",
]
