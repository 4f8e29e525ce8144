"""
Executor fan-out for clip- and model-level parallelism.

Work functions must be module-level so they pickle into worker processes.
Results always come back in input order.
"""

import asyncio
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, List, Sequence

import structlog

logger = structlog.get_logger()


def _guarded(func: Callable[[Any], Any], item: Any) -> Any:
    try:
        return func(item)
    except Exception as e:  # collected per item
        return e


async def parallel_map(
    func: Callable[[Any], Any],
    items: Sequence[Any],
    workers: int = 1,
    return_exceptions: bool = False,
) -> List[Any]:
    """
    Apply ``func`` to every item, in a process pool when ``workers > 1``.

    With ``return_exceptions`` failures appear in the result list in place of
    their values; otherwise the first failure (in input order) is raised after
    all work has finished.
    """
    items = list(items)
    if not items:
        return []

    if workers <= 1 or len(items) == 1:
        results = [_guarded(func, item) for item in items]
    else:
        loop = asyncio.get_running_loop()
        n = min(workers, len(items))
        logger.debug("Starting process pool", workers=n, items=len(items))
        with ProcessPoolExecutor(max_workers=n) as pool:
            futures = [loop.run_in_executor(pool, _guarded, func, item) for item in items]
            results = list(await asyncio.gather(*futures))

    if not return_exceptions:
        for result in results:
            if isinstance(result, BaseException):
                raise result
    return results
