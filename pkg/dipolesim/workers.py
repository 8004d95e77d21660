"""Order-preserving parallel map for independent simulation work items."""

import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from . import settings

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def resolve_workers(workers: Optional[int] = None) -> int:
    """Explicit value first, then DIPOLESIM_THREADS / hardware parallelism."""
    if workers is None:
        workers = settings.THREADS
    return max(1, int(workers))


def parallel_map(func: Callable[[T], R], items: Iterable[T], workers: Optional[int] = None) -> List[R]:
    """
    Apply `func` to every item and return the results in input order.

    `func` and the items must be picklable when more than one worker is used.
    """
    items = list(items)
    n_workers = min(resolve_workers(workers), max(1, len(items)))
    if n_workers == 1:
        return [func(item) for item in items]

    logger.debug(f"Dispatching {len(items)} work items to {n_workers} processes")
    with ProcessPoolExecutor(max_workers=n_workers) as pool:
        return list(pool.map(func, items))
