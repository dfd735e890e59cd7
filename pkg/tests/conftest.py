"""Test fixtures for rauzy-lab."""

from collections.abc import AsyncIterator
from functools import lru_cache

import pytest

from rauzy_lab.context import WORKERS
from rauzy_lab.language import FactorScanner, LanguageSlice, sft_slice
from rauzy_lab.rauzy import RauzyDigraph, build_digraph
from rauzy_lab.wordgen import Alphabet, FullShift, Periodic, Sturmian, Substitution, decode_source, prefix
from rauzy_lab.workers import WorkerPool

# =============================================================================
# Default test data factories
# =============================================================================

FIBONACCI = Substitution({"0": "01", "1": "0"}, "0")
STURMIAN_PREFIX = 100_000


@lru_cache(maxsize=8)
def make_prefix(source_text: str = "sturmian:golden", length: int = STURMIAN_PREFIX) -> str:
    """Prefix of a named source; cached because several modules scan the same word."""
    return prefix(decode_source(source_text), length)


def make_slices(word: str, *ns: int, alphabet: Alphabet | None = None) -> dict[int, LanguageSlice]:
    """Slices L_n of a word for every requested n."""
    scanner = FactorScanner(word, alphabet)
    return {s.n: s for s in scanner.slices(ns)}


def make_sturmian_slices(*ns: int) -> dict[int, LanguageSlice]:
    return make_slices(make_prefix(), *ns, alphabet=Sturmian.golden().alphabet)


def make_full_shift_slices(k: int = 2, *ns: int) -> dict[int, LanguageSlice]:
    shift = FullShift(k)
    return {n: sft_slice(shift.alphabet, shift.forbidden, n) for n in ns}


def make_periodic_slices(pattern: str, *ns: int) -> dict[int, LanguageSlice]:
    source = Periodic(pattern)
    return make_slices(prefix(source, 50 * len(pattern) + max(ns)), *ns, alphabet=source.alphabet)


def make_digraph(slices: dict[int, LanguageSlice], n: int, labelled: bool = True) -> RauzyDigraph:
    return build_digraph(slices[n], slices[n + 1], labelled=labelled)


# =============================================================================
# Fixtures
# =============================================================================


@pytest.fixture
async def workers() -> AsyncIterator[WorkerPool]:
    """Worker pool published in the WORKERS context variable."""
    async with WorkerPool(jobs=2) as pool:
        WORKERS.set(pool)
        yield pool


@pytest.fixture
def sturmian_200() -> RauzyDigraph:
    return make_digraph(make_sturmian_slices(200, 201), 200)


@pytest.fixture
def full_shift_10() -> RauzyDigraph:
    return make_digraph(make_full_shift_slices(2, 10, 11), 10)
