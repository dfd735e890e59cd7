import pytest

from rauzy_lab.workers import WorkerPool


class TestCase:
    @pytest.fixture(autouse=True)
    def _workers(self, workers: WorkerPool) -> WorkerPool:
        return workers
