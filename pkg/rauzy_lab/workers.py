import asyncio
import logging
import os
from collections.abc import Callable
from types import TracebackType
from typing import TypeVar

from typing_extensions import ParamSpec, Self

P = ParamSpec("P")
R = TypeVar("R")

log = logging.getLogger(__name__)


def default_jobs() -> int:
    if hasattr(os, "sched_getaffinity"):
        return max(1, len(os.sched_getaffinity(0)))
    return os.cpu_count() or 1


class WorkerPool:
    """Bounded thread offloading for CPU-bound analysis steps."""

    def __init__(self, jobs: int | None = None) -> None:
        self.jobs = jobs if jobs and jobs > 0 else default_jobs()
        self._semaphore: asyncio.Semaphore | None = None
        self.submitted = 0

    async def __aenter__(self) -> Self:
        self._semaphore = asyncio.Semaphore(self.jobs)
        log.debug("Worker pool started with %d jobs", self.jobs)
        return self

    async def __aexit__(
        self,
        exc_type: type[BaseException] | None,
        exc_val: BaseException | None,
        exc_tb: TracebackType | None,
    ) -> None:
        log.debug("Worker pool finished after %d tasks", self.submitted)
        self._semaphore = None

    async def run(self, func: Callable[P, R], *args: P.args, **kwargs: P.kwargs) -> R:
        if self._semaphore is None:
            raise RuntimeError("WorkerPool used outside of its context")
        async with self._semaphore:
            self.submitted += 1
            return await asyncio.to_thread(func, *args, **kwargs)
