"""
Worker pool for embarrassingly parallel Monte Carlo batches.

Tasks are module-level callables applied to picklable arguments. Results
come back in task order, so callers that merge by summation produce the
same numbers for any worker count.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, List, Sequence, Tuple, TypeVar


logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def batch_ranges(total: int, batch: int) -> List[Tuple[int, int]]:
    """Split [0, total) into consecutive [start, stop) ranges of size batch."""
    batch = max(1, batch)
    return [(start, min(start + batch, total)) for start in range(0, total, batch)]


def run_batches(
    func: Callable[[T], R],
    tasks: Iterable[T],
    workers: int = 1,
) -> List[R]:
    """
    Run func over tasks, in parallel when workers > 1.

    Args:
        func: Module-level function (must be picklable for workers > 1)
        tasks: Argument per call
        workers: Process count

    Returns:
        Results in task order
    """
    tasks = list(tasks)
    if workers <= 1 or len(tasks) <= 1:
        return [func(task) for task in tasks]

    logger.debug("Dispatching %d batches to %d workers", len(tasks), workers)
    with ProcessPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, tasks))


def merge_sums(parts: Sequence[Sequence[float]]) -> List[float]:
    """Element-wise sum of equally long partial-sum vectors, in order."""
    if not parts:
        return []
    totals = [0.0] * len(parts[0])
    for part in parts:
        for i, value in enumerate(part):
            totals[i] += value
    return totals
