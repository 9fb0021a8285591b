"""Chunked data-parallel execution over index ranges.

Verification folds split their domain into disjoint [start, stop) ranges, evaluate the
ranges on a thread pool and merge the partial results in range order. numpy releases
the GIL inside the heavy kernels, so threads give real parallelism here.
"""

from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import TypeVar

from cameron_liebler.core.logging import get_logger

logger = get_logger(__name__)

T = TypeVar("T")


def chunk_ranges(total: int, chunk_size: int) -> list[tuple[int, int]]:
    """Split [0, total) into consecutive ranges of at most chunk_size items."""
    if chunk_size < 1:
        raise ValueError("chunk_size must be positive")
    return [(start, min(start + chunk_size, total)) for start in range(0, total, chunk_size)]


def run_chunked(
    fn: Callable[[int, int], T],
    total: int,
    chunk_size: int,
    workers: int = 1,
) -> list[T]:
    """Evaluate fn(start, stop) over every chunk of [0, total).

    Args:
        fn: Pure function of a half-open index range.
        total: Size of the domain.
        chunk_size: Maximum range length.
        workers: Thread count; 1 runs inline.

    Returns:
        Results in range order, independent of completion order.
    """
    ranges = chunk_ranges(total, chunk_size)
    if workers <= 1 or len(ranges) <= 1:
        return [fn(start, stop) for start, stop in ranges]

    results: list[T | None] = [None] * len(ranges)
    with ThreadPoolExecutor(max_workers=workers) as executor:
        future_to_index = {
            executor.submit(fn, start, stop): index for index, (start, stop) in enumerate(ranges)
        }
        for done, future in enumerate(as_completed(future_to_index), 1):
            results[future_to_index[future]] = future.result()
            logger.debug("Chunk finished", extra={"done": done, "chunks": len(ranges)})

    return results  # type: ignore[return-value]
