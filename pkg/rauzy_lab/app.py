import logging

from rauzy_lab.arguments import Parser
from rauzy_lab.commands import resolve_jobs
from rauzy_lab.context import WORKERS
from rauzy_lab.workers import WorkerPool

log = logging.getLogger(__name__)


async def amain(parser: Parser) -> int:
    async with WorkerPool(resolve_jobs(parser.jobs)) as pool:
        WORKERS.set(pool)
        log.debug("Running with %d worker(s), output in %s", pool.jobs, parser.output)
        return int(await parser())
