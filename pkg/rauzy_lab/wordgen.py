import logging
import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from pathlib import Path
from types import MappingProxyType
from typing import Union

from pydantic import BaseModel, Field

from rauzy_lab.exceptions import ConfigurationError, GeneratorExhaustedError

log = logging.getLogger(__name__)

# Fixed-point bits used for named irrational slopes.
SLOPE_PRECISION_BITS = 64


@dataclass(frozen=True)
class Alphabet:
    symbols: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.symbols) < 2:
            raise ConfigurationError(f"Alphabet needs at least two symbols, got {self.symbols!r}")
        if any(len(symbol) != 1 for symbol in self.symbols):
            raise ConfigurationError(f"Alphabet symbols must be single characters: {self.symbols!r}")
        if len(set(self.symbols)) != len(self.symbols):
            raise ConfigurationError(f"Alphabet symbols must be distinct: {self.symbols!r}")

    @classmethod
    def of(cls, text: Iterable[str]) -> "Alphabet":
        return cls(tuple(sorted(set(text))))

    @classmethod
    def binary(cls) -> "Alphabet":
        return cls(("0", "1"))

    @property
    def k(self) -> int:
        return len(self.symbols)

    def extend(self, symbol: str) -> "Alphabet":
        if symbol in self.symbols:
            raise ConfigurationError(f"Letter {symbol!r} already belongs to the alphabet")
        return Alphabet(tuple(sorted((*self.symbols, symbol))))

    def __contains__(self, symbol: object) -> bool:
        return symbol in self.symbols

    def __str__(self) -> str:
        return "".join(self.symbols)


@dataclass(frozen=True)
class Substitution:
    images: Mapping[str, str]
    seed: str
    coding: Mapping[str, str] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "images", MappingProxyType(dict(self.images)))
        if self.coding is not None:
            object.__setattr__(self, "coding", MappingProxyType(dict(self.coding)))

        image = self.images.get(self.seed, "")
        if len(image) < 2 or not image.startswith(self.seed):
            raise ConfigurationError(
                f"Image of seed {self.seed!r} is {image!r}; it must start with the seed and have length >= 2"
            )
        for letter, word in self.images.items():
            if not word:
                raise ConfigurationError(f"Image of {letter!r} is empty")
            missing = set(word) - set(self.images)
            if missing:
                raise ConfigurationError(f"Image of {letter!r} uses letters without images: {sorted(missing)}")
        if self.coding is not None:
            missing = set(self.images) - set(self.coding)
            if missing:
                raise ConfigurationError(f"Coding does not cover letters {sorted(missing)}")

    @property
    def alphabet(self) -> Alphabet:
        letters = self.coding.values() if self.coding is not None else self.images.keys()
        return Alphabet.of(letters)


@dataclass(frozen=True)
class Sturmian:
    alpha: Fraction
    label: str = ""

    def __post_init__(self) -> None:
        if not 0 < self.alpha < 1:
            raise ConfigurationError(f"Sturmian slope must lie in (0, 1), got {self.alpha}")

    @classmethod
    def golden(cls) -> "Sturmian":
        # (sqrt(5) - 1) / 2 truncated to SLOPE_PRECISION_BITS + 1 fractional bits
        scale = 1 << SLOPE_PRECISION_BITS
        root = math.isqrt(5 << (2 * SLOPE_PRECISION_BITS))
        return cls(Fraction(root - scale, 2 * scale), label="golden")

    @classmethod
    def parse(cls, text: str) -> "Sturmian":
        if text.strip().lower() == "golden":
            return cls.golden()
        try:
            return cls(Fraction(Decimal(text.strip())), label=text.strip())
        except (InvalidOperation, ValueError) as e:
            raise ConfigurationError(f"Invalid Sturmian slope {text!r}") from e

    @property
    def alphabet(self) -> Alphabet:
        return Alphabet.binary()


@dataclass(frozen=True)
class CassaigneKabore:
    schedule: tuple[tuple[int, int, int], ...]
    name: str = ""
    depth: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "schedule", tuple(tuple(level) for level in self.schedule))
        if not self.schedule:
            raise ConfigurationError("Cassaigne-Kabore schedule is empty")
        for level in self.schedule:
            if len(level) != 3 or any(value < 1 for value in level):
                raise ConfigurationError(f"Schedule entries must be three positive integers, got {level!r}")
        if self.depth is not None and not 0 <= self.depth <= len(self.schedule):
            raise ConfigurationError(f"Depth {self.depth} is outside the schedule (0..{len(self.schedule)})")

    @property
    def alphabet(self) -> Alphabet:
        return Alphabet.binary()


@dataclass(frozen=True)
class FullShift:
    k: int
    forbidden: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        if self.k < 2:
            raise ConfigurationError(f"Full shift needs k >= 2, got {self.k}")
        if self.k > 10:
            raise ConfigurationError("Full shift letters are the digits 0..9, so k <= 10")

    @property
    def alphabet(self) -> Alphabet:
        return Alphabet(tuple(str(i) for i in range(self.k)))


@dataclass(frozen=True)
class Periodic:
    pattern: str

    def __post_init__(self) -> None:
        if not self.pattern:
            raise ConfigurationError("Periodic pattern must be nonempty")

    @property
    def alphabet(self) -> Alphabet:
        letters = set(self.pattern)
        if len(letters) == 1:
            other = "1" if self.pattern[0] == "0" else "0"
            letters.add(other)
        return Alphabet.of(letters)


@dataclass(frozen=True)
class FileWord:
    path: Path

    @property
    def alphabet(self) -> Alphabet:
        return Alphabet.of(_read_symbols(self.path, None))


WordSource = Union[Substitution, Sturmian, CassaigneKabore, FullShift, Periodic, FileWord]


# Cassaigne-Kabore presets


def asymptotic_schedule(levels: int = 4) -> tuple[tuple[int, int, int], ...]:
    return tuple((2 ** (2 * 2**i + 4), 2 ** (8 * 2**i), 2 ** (10 * 2**i)) for i in range(levels))


# Every analyzed level keeps both regimes non-empty: see validate_schedule.
DESK_SCHEDULE: tuple[tuple[int, int, int], ...] = ((2, 64, 1024), (2, 256, 128), (2, 128, 128), (2, 128, 128))
ASYMPTOTIC_SCHEDULE = asymptotic_schedule()

SCHEDULE_PRESETS: Mapping[str, tuple[tuple[int, int, int], ...]] = MappingProxyType(
    {"desk": DESK_SCHEDULE, "asymptotic": ASYMPTOTIC_SCHEDULE}
)


class CKLevel(BaseModel):
    level: int = Field(description="Level i of the recurrence")
    u_length: int = Field(description="|u_i|")
    v_length: int = Field(description="|v_i|")
    u_zeros: int = Field(description="|u_i|_0")
    v_zeros: int = Field(description="|v_i|_0")
    alpha: float = Field(description="|u_i|_0 / |u_i|")
    beta: float = Field(description="|v_i|_0 / |v_i|")


class CKRegime(BaseModel):
    level: int
    first: tuple[float, float] = Field(description="(2 l_i |v_i|, m_i |u_i| / 2)")
    second: tuple[float, float] = Field(description="(2 m_i |u_i|, n_i |v_i| / 2)")
    first_nonempty: bool
    second_nonempty: bool
    first_predicted: float = Field(description="(2 alpha_i + beta_i) / 3")
    second_predicted: float = Field(description="(alpha_i + 2 beta_i) / 3")

    @property
    def valid(self) -> bool:
        return self.first_nonempty and self.second_nonempty

    def tag(self, n: int) -> str | None:
        if self.first[0] < n < self.first[1]:
            return f"first@{self.level}"
        if self.second[0] < n < self.second[1]:
            return f"second@{self.level}"
        return None


def ck_lengths_and_zero_counts(schedule: tuple[tuple[int, int, int], ...], depth: int) -> tuple[CKLevel, ...]:
    if depth > len(schedule):
        raise ConfigurationError(f"Depth {depth} exceeds schedule length {len(schedule)}")
    u_len, v_len, u_zeros, v_zeros = 1, 1, 1, 0
    levels = []
    for i in range(depth + 1):
        levels.append(
            CKLevel(
                level=i,
                u_length=u_len,
                v_length=v_len,
                u_zeros=u_zeros,
                v_zeros=v_zeros,
                alpha=float(Fraction(u_zeros, u_len)),
                beta=float(Fraction(v_zeros, v_len)),
            )
        )
        if i == depth:
            break
        l, m, n = schedule[i]
        u_len, v_len = m * u_len + l * v_len, m * u_len + n * v_len
        u_zeros, v_zeros = m * u_zeros + l * v_zeros, m * u_zeros + n * v_zeros
    return tuple(levels)


def ck_regimes(schedule: tuple[tuple[int, int, int], ...], depth: int) -> tuple[CKRegime, ...]:
    if depth >= len(schedule):
        raise ConfigurationError(f"Regimes at depth {depth} need schedule level {depth}")
    regimes = []
    for stats in ck_lengths_and_zero_counts(schedule, depth):
        l, m, n = schedule[stats.level]
        first = (Fraction(2 * l * stats.v_length), Fraction(m * stats.u_length, 2))
        second = (Fraction(2 * m * stats.u_length), Fraction(n * stats.v_length, 2))
        alpha = Fraction(stats.u_zeros, stats.u_length)
        beta = Fraction(stats.v_zeros, stats.v_length)
        regimes.append(
            CKRegime(
                level=stats.level,
                first=(float(first[0]), float(first[1])),
                second=(float(second[0]), float(second[1])),
                first_nonempty=first[0] + 1 < first[1],
                second_nonempty=second[0] + 1 < second[1],
                first_predicted=float((2 * alpha + beta) / 3),
                second_predicted=float((alpha + 2 * beta) / 3),
            )
        )
    return tuple(regimes)


def validate_schedule(schedule: tuple[tuple[int, int, int], ...], levels: int) -> list[str]:
    problems = []
    for regime in ck_regimes(schedule, min(levels, len(schedule)) - 1):
        if not regime.first_nonempty:
            problems.append(f"level {regime.level}: first regime {regime.first} is empty")
        if not regime.second_nonempty:
            problems.append(f"level {regime.level}: second regime {regime.second} is empty")
    return problems


def ck_words(schedule: tuple[tuple[int, int, int], ...], depth: int) -> tuple[str, str]:
    if depth > len(schedule):
        raise ConfigurationError(f"Depth {depth} exceeds schedule length {len(schedule)}")
    u, v = "0", "1"
    for l, m, n in schedule[:depth]:
        head = u * m
        u, v = head + v * l, head + v * n
    return u, v


def _ck_prefix(schedule: tuple[tuple[int, int, int], ...], length: int) -> str:
    levels = ck_lengths_and_zero_counts(schedule, len(schedule))
    top = next((stats.level for stats in levels if stats.u_length >= length), None)
    if top is None:
        raise GeneratorExhaustedError(
            f"Schedule produces at most {levels[-1].u_length} symbols, {length} requested; extend the schedule"
        )

    full: dict[tuple[int, int], str] = {(0, 0): "0", (1, 0): "1"}

    def word(which: int, level: int) -> str:
        key = (which, level)
        if key not in full:
            full[key] = head(which, level, levels[level].u_length if which == 0 else levels[level].v_length)
        return full[key]

    def repeat(piece: str, length: int) -> str:
        count, rest = divmod(length, len(piece))
        return piece * count + piece[:rest]

    def head(which: int, level: int, length: int) -> str:
        # prefix of u_level (which=0) or v_level (which=1) without building the whole word
        if level == 0:
            return ("0" if which == 0 else "1")[:length]
        l, m, n = schedule[level - 1]
        below = levels[level - 1]
        u_part = m * below.u_length
        if length <= below.u_length:
            return head(0, level - 1, length)
        if length <= u_part:
            return repeat(word(0, level - 1), length)
        rest = length - u_part
        if rest <= below.v_length:
            return word(0, level - 1) * m + head(1, level - 1, rest)
        return word(0, level - 1) * m + repeat(word(1, level - 1), rest)

    return head(0, top, length)


def _substitution_prefix(source: Substitution, length: int) -> str:
    word = source.seed
    while len(word) < length:
        grown = "".join(source.images[letter] for letter in word)
        if len(grown) <= len(word):
            raise GeneratorExhaustedError(f"Substitution stopped growing at length {len(word)}")
        word = grown
    if source.coding is not None:
        word = word.translate(str.maketrans(dict(source.coding)))
    return word[:length]


def _sturmian_prefix(source: Sturmian, length: int) -> str:
    p, q = source.alpha.numerator, source.alpha.denominator
    if q <= length:
        log.warning("Slope %s is rational with denominator %d; the word is periodic", source.alpha, q)
    out = bytearray(length)
    zero, one = ord("0"), ord("1")
    # acc = n*p mod q; the symbol is 1 exactly when adding p wraps around
    acc = 0
    for i in range(length):
        acc += p
        if acc >= q:
            acc -= q
            out[i] = one
        else:
            out[i] = zero
    return out.decode("ascii")


def _read_symbols(path: Path, length: int | None) -> str:
    path = Path(path).expanduser()
    try:
        with path.open("rb") as fp:
            data = fp.read() if length is None else fp.read(length)
    except OSError as e:
        raise ConfigurationError(f"Cannot read word file {path}: {e}") from e
    return data.decode("latin-1")


def prefix(source: WordSource, length: int) -> str:
    if length < 1:
        raise ConfigurationError(f"Prefix length must be positive, got {length}")

    match source:
        case FullShift():
            raise ConfigurationError("Full shift is enumerative and has no single word; use sft_slice")
        case Substitution():
            return _substitution_prefix(source, length)
        case Sturmian():
            return _sturmian_prefix(source, length)
        case CassaigneKabore():
            return _ck_prefix(source.schedule, length)
        case Periodic():
            count = -(-length // len(source.pattern))
            return (source.pattern * count)[:length]
        case FileWord():
            symbols = _read_symbols(source.path, length)
            if len(symbols) < length:
                raise GeneratorExhaustedError(
                    f"File {source.path} holds {len(symbols)} symbols, {length} requested"
                )
            return symbols
    raise ConfigurationError(f"Unknown word source {source!r}")


# Text encoding of sources


def _parse_pairs(text: str) -> dict[str, str]:
    pairs: dict[str, str] = {}
    for item in filter(None, text.split(",")):
        # 0>01 and 0:01 are both accepted
        letter, sep, image = item.partition(">" if ">" in item else ":")
        if not sep or len(letter) != 1:
            raise ConfigurationError(f"Expected '<letter>><word>' or '<letter>:<word>', got {item!r}")
        pairs[letter] = image
    return pairs


def _parse_int(text: str, what: str) -> int:
    try:
        return int(text)
    except ValueError as e:
        raise ConfigurationError(f"Invalid {what} {text!r}, expected an integer") from e


def parse_schedule(text: str) -> tuple[tuple[int, int, int], ...]:
    levels = []
    for level in filter(None, text.split(",")):
        try:
            l, m, n = (int(value) for value in level.split("x"))
        except ValueError as e:
            raise ConfigurationError(f"Schedule levels are written <l>x<m>x<n>, got {level!r}") from e
        levels.append((l, m, n))
    return tuple(levels)


def _format_pairs(pairs: Mapping[str, str]) -> str:
    return ",".join(f"{letter}>{image}" for letter, image in pairs.items())


def decode_source(text: str) -> WordSource:
    kind, _, body = text.strip().partition(":")
    payload, *options_list = body.split(";")
    options: dict[str, str] = {}
    for option in options_list:
        key, sep, value = option.partition("=")
        if not sep:
            raise ConfigurationError(f"Expected key=value option, got {option!r}")
        options[key.strip()] = value.strip()

    match kind.strip().lower():
        case "substitution":
            images = _parse_pairs(payload)
            if not images:
                raise ConfigurationError("Substitution needs at least one image")
            coding = _parse_pairs(options["coding"]) if "coding" in options else None
            return Substitution(images, options.get("seed", next(iter(images))), coding)
        case "sturmian":
            return Sturmian.parse(payload)
        case "ck":
            if payload in SCHEDULE_PRESETS:
                schedule, name = SCHEDULE_PRESETS[payload], payload
            else:
                schedule, name = parse_schedule(payload), ""
            depth = _parse_int(options["depth"], "depth") if "depth" in options else None
            return CassaigneKabore(schedule, name=name, depth=depth)
        case "full-shift":
            k = _parse_int(payload, "alphabet size")
            forbidden = frozenset(filter(None, options.get("forbidden", "").split(",")))
            return FullShift(k, forbidden)
        case "periodic":
            return Periodic(payload)
        case "file":
            return FileWord(Path(payload))
    raise ConfigurationError(f"Unknown source kind {kind!r} in {text!r}")


def encode_source(source: WordSource) -> str:
    match source:
        case Substitution():
            text = f"substitution:{_format_pairs(source.images)};seed={source.seed}"
            if source.coding is not None:
                text += f";coding={_format_pairs(source.coding)}"
            return text
        case Sturmian():
            return f"sturmian:{source.label or source.alpha}"
        case CassaigneKabore():
            body = source.name or ",".join("x".join(map(str, level)) for level in source.schedule)
            return f"ck:{body}" + (f";depth={source.depth}" if source.depth is not None else "")
        case FullShift():
            text = f"full-shift:{source.k}"
            if source.forbidden:
                text += f";forbidden={','.join(sorted(source.forbidden))}"
            return text
        case Periodic():
            return f"periodic:{source.pattern}"
        case FileWord():
            return f"file:{source.path}"
    raise ConfigurationError(f"Unknown word source {source!r}")
