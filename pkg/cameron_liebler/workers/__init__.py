"""Data-parallel helpers for verification folds."""

from cameron_liebler.workers.pool import chunk_ranges, run_chunked

__all__ = ["chunk_ranges", "run_chunked"]
