import logging
from collections.abc import Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from pydantic import BaseModel, Field

from rauzy_lab.exceptions import ConfigurationError, ConsistencyError
from rauzy_lab.language import LanguageSlice, WindowRanks, prolongation_census
from rauzy_lab.wordgen import CassaigneKabore, CKRegime, ck_lengths_and_zero_counts, ck_regimes, prefix

log = logging.getLogger(__name__)

DEFAULT_TRUNCATION_RATIO = 100
MAX_OSCILLATION_PREFIX = 1 << 22


class CylinderEstimate(BaseModel):
    """Counts of a cylinder word u inside the slice L_n.

    The suffix count estimates mu([u]) through |L_n^u| / p(n); the offset
    counts measure the same thing at every position and so expose how far the
    estimate is from shift invariant.
    """

    n: int
    u: str
    p: int = Field(description="p(n)")
    suffix_count: int = Field(description="Words of L_n ending with u")
    offset_counts: list[int] = Field(description="Words of L_n with u at offset j, j = 0..n-|u|")

    @property
    def suffix_frequency(self) -> float:
        return self.suffix_count / self.p if self.p else 0.0

    @property
    def offset_frequencies(self) -> list[float]:
        return [count / self.p if self.p else 0.0 for count in self.offset_counts]


class FrequencyProfile(BaseModel):
    """Extremes of the frequency of u over every window of one length."""

    u: str
    n: int = Field(description="Window spans positions k..k+n")
    inf: float
    sup: float
    windows: int = Field(description="Number of window positions inside the prefix")

    @property
    def spread(self) -> float:
        return self.sup - self.inf


def cylinder_estimate(slice_: LanguageSlice, u: str) -> CylinderEstimate:
    """Count the words of the slice that end with u and that hold u at each offset."""
    if not u or len(u) > slice_.n:
        raise ConfigurationError(f"Cylinder word length must satisfy 1 <= |u| <= n={slice_.n}, got {u!r}")
    width = len(u)
    offsets = [0] * (slice_.n - width + 1)
    suffix = 0
    for word in slice_:
        suffix += word.endswith(u)
        start = word.find(u)
        while start != -1:
            offsets[start] += 1
            start = word.find(u, start + 1)
    return CylinderEstimate(n=slice_.n, u=u, p=slice_.p, suffix_count=suffix, offset_counts=offsets)


def shift_invariance_gap(estimate: CylinderEstimate) -> float:
    """Largest jump between the frequencies of u at neighbouring offsets."""
    frequencies = estimate.offset_frequencies
    if len(frequencies) < 2:
        raise ConfigurationError(f"Shift invariance needs at least two offsets, n={estimate.n} and u={estimate.u!r}")
    return max(abs(a - b) for a, b in zip(frequencies, frequencies[1:]))


def sliding_frequency(word: str, u: str) -> float:
    """Occurrences of u per position of the whole word."""
    counts = _occurrences(word, u)
    return float(counts.sum()) / len(counts) if len(counts) else 0.0


def _occurrences(word: str, u: str) -> np.ndarray:
    codes = np.frombuffer(word.encode("latin-1"), dtype=np.uint8)
    pattern = np.frombuffer(u.encode("latin-1"), dtype=np.uint8)
    if len(pattern) > len(codes):
        return np.zeros(0, dtype=bool)
    return np.all(sliding_window_view(codes, len(pattern)) == pattern, axis=1)


def uniform_frequency_profile(word: str, u: str, n: int) -> FrequencyProfile:
    """Smallest and largest frequency of u over all windows of n + 1 symbols.

    A uniquely ergodic word drives inf and sup together as n grows; a spread
    that stays open is the visible trace of several ergodic measures.
    """
    if not u:
        raise ConfigurationError("Frequency profile needs a nonempty word u")
    if len(word) < n + len(u):
        raise ConfigurationError(f"Prefix of length {len(word)} is shorter than n + |u| = {n + len(u)}")
    hits = np.concatenate(([0], np.cumsum(_occurrences(word, u), dtype=np.int64)))
    # window k covers positions k..k+n, occurrences may start at k..k+n-|u|+1
    starts = np.arange(0, len(word) - n)
    span = max(n - len(u) + 2, 0)
    counts = hits[np.minimum(starts + span, len(hits) - 1)] - hits[starts]
    frequencies = counts / (n + 1)
    return FrequencyProfile(
        u=u, n=n, inf=float(frequencies.min()), sup=float(frequencies.max()), windows=len(starts)
    )


class LeftSpecialReport(BaseModel):
    """Left-special words of L_n with their extension counts."""

    n: int
    words: list[str]
    extensions: list[int]
    increment: int = Field(description="p(n+1) - p(n)")
    excess: int = Field(description="Sum over left-special words of (extensions - 1)")
    e_l: int


def left_special_report(lower: LanguageSlice, upper: LanguageSlice) -> LeftSpecialReport:
    """Check that the excess of the left-special words equals p(n+1) - p(n) + e_l."""
    census = prolongation_census(lower, upper)
    excess = sum(count - 1 for count in census.left_special_extensions)
    increment = census.p_next - census.p
    if excess != increment + census.e_l:
        raise ConsistencyError(f"Left-special excess {excess} != p(n+1) - p(n) + e_l = {increment + census.e_l}")
    return LeftSpecialReport(
        n=census.n,
        words=census.left_special,
        extensions=census.left_special_extensions,
        increment=increment,
        excess=excess,
        e_l=census.e_l,
    )


class OscillationRow(BaseModel):
    """Statistics of one grid point of a word prefix."""

    n: int
    p: int
    increment: int = Field(description="p(n+1) - p(n)")
    zero_suffix_count: int = Field(description="|L_n^a|, words ending with the tracked letter a")
    frequency: float = Field(description="|L_n^a| / p(n)")
    left_special: int
    regime_tag: str = Field(description="first@i or second@i inside a regime of level i, none otherwise")
    level: int | None = None


class OscillationResult(BaseModel):
    """Oscillation of the suffix frequency of one letter along an n grid.

    Regimes are present only when a Cassaigne-Kabore schedule is known;
    a bare word gets rows without regime tags.
    """

    schedule: list[tuple[int, int, int]] | None = None
    depth: int | None = None
    letter: str = "0"
    prefix_length: int
    regimes: list[CKRegime] = Field(default_factory=list)
    problems: list[str] = Field(default_factory=list, description="Levels whose regimes are empty")
    rows: list[OscillationRow]

    @property
    def max_increment(self) -> int:
        return max((row.increment for row in self.rows), default=0)


def oscillation_prefix_length(schedule: tuple[tuple[int, int, int], ...], depth: int) -> int:
    """A few copies of u_{depth+2}, at most MAX_OSCILLATION_PREFIX symbols.

    The copies form a prefix of u_{depth+3}; deeper levels are capped and
    their largest regimes then fall outside the truncation guard.
    """
    level = min(depth + 2, len(schedule))
    lengths = ck_lengths_and_zero_counts(schedule, level)
    if level < len(schedule):
        length = min(schedule[level][1], 4) * lengths[level].u_length
    else:
        length = lengths[level].u_length
    return min(length, MAX_OSCILLATION_PREFIX)


def schedule_regimes(
    schedule: tuple[tuple[int, int, int], ...], depth: int
) -> tuple[tuple[CKRegime, ...], list[str]]:
    regimes = ck_regimes(schedule, depth)
    problems = []
    for regime in regimes:
        if not regime.valid:
            problems.append(f"level {regime.level}: regimes {regime.first} and {regime.second} are not both open")
            log.warning("Schedule level %d has an empty regime; it is left unannotated", regime.level)
    return regimes, problems


def check_truncation(n_grid: Sequence[int], length: int, truncation_ratio: int) -> list[int]:
    if not n_grid:
        raise ConfigurationError("Oscillation grid is empty")
    grid = sorted(set(n_grid))
    if grid[0] < 1:
        raise ConfigurationError(f"Oscillation grid needs positive n, got {grid[0]}")
    if (grid[-1] + 1) * truncation_ratio > length:
        raise ConfigurationError(
            f"Largest n={grid[-1]} breaks the truncation guard for a prefix of {length} (ratio {truncation_ratio})"
        )
    return grid


def _tag(regimes: Sequence[CKRegime], n: int) -> tuple[str, int | None]:
    for regime in regimes:
        hit = regime.tag(n) if regime.valid else None
        if hit is not None:
            return hit, regime.level
    return "none", None


def oscillation_rows(
    word: str, n_grid: Sequence[int], letter: str = "0", regimes: Sequence[CKRegime] = ()
) -> list[OscillationRow]:
    """p(n), p(n+1) - p(n), |L_n^a| and the left-special count at every grid point.

    Only the grid points and their successors are ranked, so the cost does not
    depend on how many lengths lie between them.
    """
    ranks = WindowRanks(word)
    if letter not in ranks.alphabet:
        raise ConfigurationError(f"Letter {letter!r} does not occur in the word (alphabet {ranks.alphabet})")
    code = ranks.alphabet.symbols.index(letter)
    k = ranks.alphabet.k
    codes = ranks.codes

    rows = []
    for n in sorted(set(n_grid)):
        classes, p = ranks.classes(n)
        ends = codes[n - 1 : n - 1 + len(classes)] == code
        zeros = len(np.unique(classes[ends]))
        # left extensions: the letter before each window, for windows not at position 0
        pairs = np.unique(classes[1:] * k + codes[: len(classes) - 1])
        left_special = int(np.count_nonzero(np.bincount(pairs // k) >= 2))
        p_next = ranks.complexity(n + 1)
        tag, level = _tag(regimes, n)
        rows.append(
            OscillationRow(
                n=n,
                p=p,
                increment=p_next - p,
                zero_suffix_count=zeros,
                frequency=zeros / p,
                left_special=left_special,
                regime_tag=tag,
                level=level,
            )
        )
    return rows


def word_oscillation(
    word: str,
    n_grid: Sequence[int],
    letter: str = "0",
    schedule: tuple[tuple[int, int, int], ...] | None = None,
    depth: int = 0,
    truncation_ratio: int = DEFAULT_TRUNCATION_RATIO,
) -> OscillationResult:
    """Oscillation of a given word; a schedule adds regime tags but does not change the rows."""
    grid = check_truncation(n_grid, len(word), truncation_ratio)
    regimes: tuple[CKRegime, ...] = ()
    problems: list[str] = []
    if schedule is not None:
        regimes, problems = schedule_regimes(schedule, depth)
    log.info("Oscillation on a prefix of %d symbols, grid %s", len(word), grid)
    return OscillationResult(
        schedule=list(schedule) if schedule is not None else None,
        depth=depth if schedule is not None else None,
        letter=letter,
        prefix_length=len(word),
        regimes=list(regimes),
        problems=problems,
        rows=oscillation_rows(word, grid, letter, regimes),
    )


def ck_oscillation(
    schedule: tuple[tuple[int, int, int], ...],
    depth: int,
    n_grid: Sequence[int],
    prefix_length: int | None = None,
    truncation_ratio: int = DEFAULT_TRUNCATION_RATIO,
) -> OscillationResult:
    """Oscillation on a prefix of the Cassaigne-Kabore word, capped prefix by default."""
    length = prefix_length or oscillation_prefix_length(schedule, depth)
    check_truncation(n_grid, length, truncation_ratio)
    word = prefix(CassaigneKabore(schedule), length)
    return word_oscillation(word, n_grid, "0", schedule, depth, truncation_ratio)


def subsequence_near(rows: Sequence[OscillationRow], gamma: float, tolerance: float) -> list[int]:
    """Grid points where the frequency curve sits within tolerance of the level gamma."""
    return [row.n for row in rows if abs(row.frequency - gamma) <= tolerance]
