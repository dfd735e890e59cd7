import bisect
import logging
from collections import Counter
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from pydantic import BaseModel, Field

from rauzy_lab.exceptions import ConfigurationError, ConsistencyError
from rauzy_lab.wordgen import Alphabet

log = logging.getLogger(__name__)

# Largest bitmap FactorScanner allocates, in units of the number of windows.
BITMAP_FACTOR = 4


@dataclass(frozen=True)
class LanguageSlice:
    """The set L_n of length-n words, kept sorted for binary-search membership."""

    n: int
    factors: tuple[str, ...]
    alphabet: Alphabet

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ConfigurationError(f"Slice length must be non-negative, got {self.n}")
        object.__setattr__(self, "factors", tuple(sorted(set(self.factors))))

    @property
    def p(self) -> int:
        return len(self.factors)

    def __len__(self) -> int:
        return len(self.factors)

    def __iter__(self) -> Iterator[str]:
        return iter(self.factors)

    def __contains__(self, word: object) -> bool:
        if not isinstance(word, str):
            return False
        i = bisect.bisect_left(self.factors, word)
        return i < len(self.factors) and self.factors[i] == word

    def index(self, word: str) -> int:
        i = bisect.bisect_left(self.factors, word)
        if i == len(self.factors) or self.factors[i] != word:
            raise KeyError(word)
        return i

    def validate(self) -> None:
        for word in self.factors:
            if len(word) != self.n:
                raise ConsistencyError(f"Factor of length {len(word)} in slice n={self.n}", witness=word)
            if any(letter not in self.alphabet for letter in word):
                raise ConsistencyError(f"Factor uses letters outside {self.alphabet}", witness=word)


def encode_word(word: str, alphabet: Alphabet) -> np.ndarray:
    """Letter codes 0..k-1 of a word, in alphabet order."""
    lut = np.full(256, -1, dtype=np.int64)
    for i, symbol in enumerate(alphabet.symbols):
        if ord(symbol) > 0xFF:
            raise ConfigurationError(f"Symbol {symbol!r} does not fit in one byte")
        lut[ord(symbol)] = i
    codes = lut[np.frombuffer(word.encode("latin-1"), dtype=np.uint8)]
    if (codes < 0).any():
        position = int(np.argmax(codes < 0))
        raise ConfigurationError(f"Symbol {word[position]!r} at {position} is not in alphabet {alphabet}")
    return codes


class FactorScanner:
    """Enumerates L_1, L_2, ... of a finite word.

    Windows of length n are grouped into classes numbered in lexicographic order.
    Extending every window by one letter refines the classes with a single pass.
    """

    def __init__(self, word: str, alphabet: Alphabet | None = None) -> None:
        if not word:
            raise ConfigurationError("Cannot scan factors of an empty word")
        self.word = word
        self.alphabet = alphabet or Alphabet.of(word)
        self._codes = encode_word(word, self.alphabet)

        self.n = 0
        self.count = 1
        self._classes = np.zeros(len(word) + 1, dtype=np.int64)

    @property
    def length(self) -> int:
        return len(self.word)

    def advance(self) -> int:
        """Move from n to n+1 and return p(n+1)."""
        if self.n >= self.length:
            raise ConfigurationError(f"Cannot extend factors beyond the word length {self.length}")
        k = self.alphabet.k
        keys = self._classes[: self.length - self.n] * k + self._codes[self.n :]
        if self.count * k <= BITMAP_FACTOR * len(keys):
            present = np.zeros(self.count * k, dtype=bool)
            present[keys] = True
            rank = np.cumsum(present) - 1
            self._classes = rank[keys]
            self.count = int(present.sum())
        else:
            # wide alphabets: sort the keys instead of a count * k bitmap
            unique, self._classes = np.unique(keys, return_inverse=True)
            self.count = len(unique)
        self.n += 1
        return self.count

    def advance_to(self, n: int) -> None:
        if n < self.n:
            raise ConfigurationError(f"Scanner is already at n={self.n}, cannot go back to {n}")
        if n > self.length:
            raise ConfigurationError(f"n={n} exceeds the word length {self.length}")
        while self.n < n:
            self.advance()

    def current(self) -> LanguageSlice:
        _, first = np.unique(self._classes, return_index=True)
        words = [self.word[i : i + self.n] for i in first.tolist()]
        return LanguageSlice(self.n, tuple(words), self.alphabet)

    def slices(self, ns: Iterable[int]) -> Iterator[LanguageSlice]:
        for n in sorted(set(ns)):
            self.advance_to(n)
            yield self.current()

    def complexity_upto(self, n_max: int) -> list[int]:
        counts = []
        while self.n < n_max:
            counts.append(self.advance())
        return counts


class WindowRanks:
    """Classes of the length-n windows of a word at arbitrary n, by doubling.

    Level j numbers the windows of length 2^j. A window of length n with
    2^j <= n < 2^(j+1) is identified by its two overlapping level j blocks, so
    p(n) costs a sort of the window keys instead of a scan through every m < n.
    Only the current level is kept: lengths must be requested in ascending order.
    """

    def __init__(self, word: str, alphabet: Alphabet | None = None) -> None:
        if not word:
            raise ConfigurationError("Cannot rank windows of an empty word")
        self.alphabet = alphabet or Alphabet.of(word)
        self.codes = encode_word(word, self.alphabet)
        self.level = 0
        self._ranks = self.codes
        self._count = self.alphabet.k

    @property
    def length(self) -> int:
        return len(self.codes)

    def _double(self) -> None:
        span = 1 << self.level
        keys = self._ranks[:-span] * self._count + self._ranks[span:]
        unique, self._ranks = np.unique(keys, return_inverse=True)
        self._count = len(unique)
        self.level += 1

    def classes(self, n: int) -> tuple[np.ndarray, int]:
        """Class of the window starting at every position 0..N-n, and p(n)."""
        if not 1 <= n <= self.length:
            raise ConfigurationError(f"Window length must satisfy 1 <= n <= {self.length}, got {n}")
        if n < 1 << self.level:
            raise ConfigurationError(f"Ranks are at level {self.level}, cannot go back to n={n}")
        while 2 << self.level <= n:
            self._double()
        shift = n - (1 << self.level)
        windows = self.length - n + 1
        keys = self._ranks[:windows] * self._count + self._ranks[shift : shift + windows]
        unique, classes = np.unique(keys, return_inverse=True)
        return classes, len(unique)

    def complexity(self, n: int) -> int:
        return self.classes(n)[1]


def factors(word: str, n: int, alphabet: Alphabet | None = None) -> LanguageSlice:
    if n < 1 or n > len(word):
        raise ConfigurationError(f"Factor length must satisfy 1 <= n <= {len(word)}, got {n}")
    scanner = FactorScanner(word, alphabet)
    scanner.advance_to(n)
    return scanner.current()


def sft_slice(alphabet: Alphabet, forbidden: Iterable[str], n: int) -> LanguageSlice:
    forbidden = sorted(set(forbidden))
    for word in forbidden:
        if not word:
            raise ConfigurationError("Forbidden words must be nonempty")
        if any(letter not in alphabet for letter in word):
            raise ConfigurationError(f"Forbidden word {word!r} uses letters outside {alphabet}")

    words = [""]
    for _ in range(n):
        grown = []
        for word in words:
            for letter in alphabet.symbols:
                extended = word + letter
                # only suffixes of the new word can create a forbidden factor
                if not any(extended.endswith(bad) for bad in forbidden):
                    grown.append(extended)
        words = grown
    return LanguageSlice(n, tuple(words), alphabet)


class ComplexityProfile(BaseModel):
    ns: list[int] = Field(description="Word lengths n")
    counts: list[int] = Field(description="p(n)")
    ratios: list[str | None] = Field(description="p(n+1)/p(n) as an exact fraction, None past extinction")
    ratio_values: list[float | None] = Field(description="p(n+1)/p(n) as floats")
    died_at: int | None = Field(default=None, description="First n with an empty slice")


def complexity(slices: Sequence[LanguageSlice]) -> ComplexityProfile:
    ns = [s.n for s in slices]
    if any(b != a + 1 for a, b in zip(ns, ns[1:])):
        raise ConfigurationError(f"Slices must be at consecutive n, got {ns}")
    counts = [s.p for s in slices]
    died_at = next((s.n for s in slices if s.p == 0), None)
    if died_at is not None:
        log.warning("Language died out at n=%d", died_at)

    ratios: list[Fraction | None] = [Fraction(b, a) if a else None for a, b in zip(counts, counts[1:])]
    return ComplexityProfile(
        ns=ns,
        counts=counts,
        ratios=[str(r) if r is not None else None for r in ratios],
        ratio_values=[float(r) if r is not None else None for r in ratios],
        died_at=died_at,
    )


class ProlongationCensus(BaseModel):
    n: int
    k: int = Field(description="Alphabet size")
    p: int = Field(description="p(n)")
    p_next: int = Field(description="p(n+1)")
    e_l: int = Field(description="Words without a left extension")
    e_r: int = Field(description="Words without a right extension")
    s_l: int = Field(description="Words with at least two left extensions")
    s_r: int = Field(description="Words with at least two right extensions")
    r_l: int = Field(description="Words with exactly one left extension")
    r_r: int = Field(description="Words with exactly one right extension")
    r: int = Field(description="Words with exactly one extension on each side")
    left_special: list[str] = Field(description="Words with at least two left extensions")
    left_special_extensions: list[int] = Field(description="Left extension counts of the left-special words")
    degree_pairs: dict[str, int] = Field(description="Counts of words by '<left>,<right>' extension counts")

    def violations(self) -> list[str]:
        problems = []
        if self.e_l + self.s_l + self.r_l != self.p:
            problems.append("left partition e_l + s_l + r_l != p(n)")
        if self.e_r + self.s_r + self.r_r != self.p:
            problems.append("right partition e_r + s_r + r_r != p(n)")
        if self.r > min(self.r_l, self.r_r):
            problems.append("r > min(r_l, r_r)")
        if self.p - self.s_l - self.s_r - self.e_l - self.e_r > self.r:
            problems.append("p(n) - s_l - s_r - e_l - e_r > r")
        for side, e, s in (("left", self.e_l, self.s_l), ("right", self.e_r, self.s_r)):
            growth = self.p_next - self.p + e
            if not s <= growth <= (self.k - 1) * s:
                problems.append(f"{side} growth bound s <= p(n+1) - p(n) + e <= (k-1) s fails: {growth}, s={s}")
        return problems

    def check(self) -> "ProlongationCensus":
        problems = self.violations()
        if problems:
            raise ConsistencyError(f"Prolongation census at n={self.n}: " + "; ".join(problems))
        return self


def extension_counts(lower: LanguageSlice, upper: LanguageSlice) -> tuple[Counter[str], Counter[str]]:
    if upper.n != lower.n + 1:
        raise ConfigurationError(f"Slices must be consecutive, got n={lower.n} and n={upper.n}")
    if upper.alphabet != lower.alphabet:
        raise ConfigurationError(f"Slices use different alphabets: {lower.alphabet} and {upper.alphabet}")
    left: Counter[str] = Counter()
    right: Counter[str] = Counter()
    for word in upper:
        head, tail = word[:-1], word[1:]
        if head not in lower or tail not in lower:
            raise ConsistencyError(f"L_{upper.n} is not factorial-consistent with L_{lower.n}", witness=word)
        right[head] += 1
        left[tail] += 1
    return left, right


def prolongation_census(lower: LanguageSlice, upper: LanguageSlice) -> ProlongationCensus:
    left, right = extension_counts(lower, upper)
    pairs: Counter[str] = Counter()
    specials: list[tuple[str, int]] = []
    e_l = e_r = s_l = s_r = r_l = r_r = r = 0
    for word in lower:
        a, b = left[word], right[word]
        pairs[f"{a},{b}"] += 1
        e_l += a == 0
        e_r += b == 0
        s_l += a >= 2
        s_r += b >= 2
        r_l += a == 1
        r_r += b == 1
        r += a == 1 and b == 1
        if a >= 2:
            specials.append((word, a))
    return ProlongationCensus(
        n=lower.n,
        k=lower.alphabet.k,
        p=lower.p,
        p_next=upper.p,
        e_l=e_l,
        e_r=e_r,
        s_l=s_l,
        s_r=s_r,
        r_l=r_l,
        r_r=r_r,
        r=r,
        left_special=[word for word, _ in specials],
        left_special_extensions=[count for _, count in specials],
        degree_pairs=dict(sorted(pairs.items())),
    )


def adjoin_sentinel(slices: Sequence[LanguageSlice], sentinel: str) -> list[LanguageSlice]:
    """L~_n = L_n with z.L_{n-1} for every n whose predecessor slice is available (or n = 1)."""
    if not slices:
        return []
    alphabet = slices[0].alphabet
    if sentinel in alphabet:
        raise ConfigurationError(f"Sentinel {sentinel!r} already belongs to the alphabet {alphabet}")
    extended = alphabet.extend(sentinel)
    by_n = {s.n: s for s in slices}
    result = []
    for current in sorted(slices, key=lambda s: s.n):
        if current.n == 1:
            previous: Iterable[str] = ("",)
        elif current.n - 1 in by_n:
            previous = by_n[current.n - 1]
        else:
            continue
        words = (*current.factors, *(sentinel + word for word in previous))
        result.append(LanguageSlice(current.n, words, extended))
    return result


class ProlongabilityDiagnostic(BaseModel):
    ns: list[int]
    left_ratios: list[float] = Field(description="e_l(n)/p(n)")
    right_ratios: list[float] = Field(description="e_r(n)/p(n)")
    threshold: float
    almost_prolongable: bool = Field(description="Both ratios are within the threshold at the largest tested n")


def almost_prolongable_diagnostic(
    censuses: Sequence[ProlongationCensus], threshold: float = 0.1
) -> ProlongabilityDiagnostic:
    ordered = sorted(censuses, key=lambda c: c.n)
    left = [c.e_l / c.p if c.p else 0.0 for c in ordered]
    right = [c.e_r / c.p if c.p else 0.0 for c in ordered]
    verdict = bool(ordered) and left[-1] <= threshold and right[-1] <= threshold
    return ProlongabilityDiagnostic(
        ns=[c.n for c in ordered],
        left_ratios=left,
        right_ratios=right,
        threshold=threshold,
        almost_prolongable=verdict,
    )
