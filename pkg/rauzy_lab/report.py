import asyncio
import logging
from collections.abc import Callable, Sequence
from fractions import Fraction
from typing import Any

from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from rauzy_lab.context import WORKERS
from rauzy_lab.exceptions import ConfigurationError, ConsistencyError
from rauzy_lab.language import (
    FactorScanner,
    LanguageSlice,
    ProlongabilityDiagnostic,
    adjoin_sentinel,
    almost_prolongable_diagnostic,
    prolongation_census,
    sft_slice,
)
from rauzy_lab.localstat import cycle_components, line_fraction_undirected, path_fraction
from rauzy_lab.rauzy import build_digraph, underlying_graph
from rauzy_lab.spectra import DEFAULT_EIGEN_CAP, DEFAULT_MOMENTS, second_moment_identity, spectral_summary
from rauzy_lab.wordgen import Alphabet, FileWord, FullShift, WordSource, encode_source, prefix

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1


def parse_int_list(value: Any) -> Any:
    if isinstance(value, str):
        try:
            return [int(item) for item in value.replace(" ", "").split(",") if item]
        except ValueError as e:
            raise ValueError(f"expected comma separated integers, got {value!r}") from e
    return value


class Thresholds(BaseModel):
    ratio: float = Field(default=1.05, gt=1, description="p(n+1)/p(n) must be at most this")
    line_fraction: float = Field(default=0.9, gt=0, le=1, description="Directed line fraction must reach this")
    line_radius: int = Field(default=2, ge=1, description="Radius of the line fraction verdict")
    moment_gap: float = Field(default=0.5, gt=0, description="Largest allowed |m_j - arcsine_j|")
    moment_order: int = Field(default=4, ge=2, description="Moments j <= this enter the verdict")
    prolongable: float = Field(default=0.1, gt=0, description="Largest e_l/p and e_r/p for almost prolongability")
    trend_tolerance: float = Field(default=0.01, ge=0, description="Allowed deterioration across the last points")


class AnalysisConfig(BaseModel):
    """Prefix length, n grid and thresholds of one convergence analysis."""

    prefix_length: int = Field(default=1_000_000, gt=0)
    n_grid: list[int] = Field(min_length=1)
    radii: list[int] = Field(default_factory=lambda: [1, 2, 3])
    moments: int = Field(default=DEFAULT_MOMENTS, ge=2)
    eigen_cap: int = Field(default=DEFAULT_EIGEN_CAP, gt=0)
    truncation_ratio: int = Field(default=100, gt=0)
    sentinel: str | None = Field(default=None, min_length=1, max_length=1)
    thresholds: Thresholds = Field(default_factory=Thresholds)

    @field_validator("n_grid", "radii", mode="before")
    @classmethod
    def split_lists(cls, value: Any) -> Any:
        return parse_int_list(value)

    @field_validator("n_grid", "radii")
    @classmethod
    def check_positive_ascending(cls, value: list[int]) -> list[int]:
        if any(item < 1 for item in value):
            raise ValueError("values must be positive")
        if any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError("values must be strictly ascending")
        return value

    @model_validator(mode="after")
    def check_moment_order(self) -> "AnalysisConfig":
        if self.moments < self.thresholds.moment_order:
            raise ValueError(f"moment order {self.moments} is below the verdict order {self.thresholds.moment_order}")
        return self

    @classmethod
    def build(cls, **values: Any) -> "AnalysisConfig":
        try:
            return cls.model_validate(values)
        except ValidationError as e:
            raise ConfigurationError(f"Invalid analysis configuration: {e}") from e

    @property
    def all_radii(self) -> list[int]:
        return sorted({*self.radii, self.thresholds.line_radius})


class ReportRow(BaseModel):
    """Every statistic measured at one n of the grid."""

    n: int
    p: int = Field(description="p(n)")
    p_next: int = Field(description="p(n+1)")
    ratio: float | None = Field(description="p(n+1)/p(n), None once the language is empty")
    ratio_exact: str = Field(description="p(n+1)/p(n) as a fraction")
    e_l_ratio: float = Field(description="e_l(n)/p(n)")
    e_r_ratio: float = Field(description="e_r(n)/p(n)")
    r_ratio: float = Field(description="r(n)/p(n)")
    degree_two_fraction: float = Field(description="Words with one extension on each side, over p(n)")
    left_special: int
    line_fraction: dict[int, float] = Field(description="Directed line fraction by radius")
    undirected_line_fraction: dict[int, float] = Field(description="Undirected line fraction by radius")
    cycle_counts: dict[int, int] = Field(description="c_r(n)")
    moments: list[float]
    moment_gaps: list[float]
    second_moment_residual: int
    second_moment_passed: bool
    ks_distance: float | None = None


class Verdicts(BaseModel):
    ratio_to_one: bool
    line_fraction_to_one: bool
    moments_to_arcsine: bool
    almost_prolongable: bool
    consistent: bool = Field(description="The ratio, line fraction and moment verdicts agree")
    non_prolongable_pattern: bool = Field(
        description="Verdicts disagree on a language that is not almost prolongable, as the sentinel construction does"
    )
    notes: list[str] = Field(default_factory=list)


class ConvergenceReport(BaseModel):
    """Rows over the grid, prolongability diagnostic and verdicts, as written to report.json."""

    schema_version: int = SCHEMA_VERSION
    generator: str
    prefix_length: int | None = Field(description="Prefix length N, None for enumerative languages")
    config: AnalysisConfig
    rows: list[ReportRow]
    prolongability: ProlongabilityDiagnostic
    verdicts: Verdicts
    warnings: list[str] = Field(default_factory=list)


def describe(source: WordSource, sentinel: str | None) -> str:
    text = encode_source(source)
    return f"{text}+sentinel({sentinel})" if sentinel else text


def needed_lengths(config: AnalysisConfig) -> list[int]:
    needed = set()
    for n in config.n_grid:
        needed.update((n, n + 1))
        if config.sentinel is not None and n > 1:
            needed.add(n - 1)
    return sorted(needed)


def collect_slices(source: WordSource, config: AnalysisConfig) -> tuple[dict[int, LanguageSlice], int | None]:
    """Language slices for every n the grid needs, and the prefix length they were read from.

    The length is None for a full shift, whose slices are enumerated.
    """
    ns = needed_lengths(config)
    if isinstance(source, FullShift):
        slices = {n: sft_slice(source.alphabet, source.forbidden, n) for n in ns}
        length = None
    else:
        if ns[-1] * config.truncation_ratio > config.prefix_length:
            raise ConfigurationError(
                f"n={ns[-1]} breaks the truncation guard n <= N/{config.truncation_ratio} "
                f"with N={config.prefix_length}"
            )
        word = prefix(source, config.prefix_length)
        alphabet = Alphabet.of(word) if isinstance(source, FileWord) else source.alphabet
        slices = {s.n: s for s in FactorScanner(word, alphabet).slices(ns)}
        length = config.prefix_length

    if config.sentinel is not None:
        slices = {s.n: s for s in adjoin_sentinel(list(slices.values()), config.sentinel)}
    return slices, length


def analyze_point(lower: LanguageSlice, upper: LanguageSlice, config: AnalysisConfig) -> tuple[ReportRow, list[str]]:
    warnings: list[str] = []
    census = prolongation_census(lower, upper).check()
    digraph = build_digraph(lower, upper)
    if len(digraph.arcs) != upper.p:
        raise ConsistencyError(f"R({lower.n}) has {len(digraph.arcs)} arcs, p(n+1)={upper.p}")

    cycles = cycle_components(digraph)
    problems = cycles.violations(lower.alphabet.k, lower.n)
    if problems:
        raise ConsistencyError(f"Cycle bound fails at n={lower.n}: " + "; ".join(problems))

    multigraph = underlying_graph(digraph)
    for problem in multigraph.check_bounds(lower.alphabet.k):
        warnings.append(f"n={lower.n}: {problem}")

    summary = spectral_summary(multigraph, lower.n, config.moments, config.eigen_cap)
    second = second_moment_identity(summary, lower.p, upper.p, lower.alphabet.k)
    if lower.p and summary.eigenvalues is None:
        warnings.append(f"n={lower.n}: eigenvalues skipped, {lower.p} vertices exceed the cap {config.eigen_cap}")

    p = lower.p
    ratio = Fraction(upper.p, p) if p else None
    row = ReportRow(
        n=lower.n,
        p=p,
        p_next=upper.p,
        ratio=float(ratio) if ratio is not None else None,
        ratio_exact=str(ratio) if ratio is not None else "undefined",
        e_l_ratio=census.e_l / p if p else 0.0,
        e_r_ratio=census.e_r / p if p else 0.0,
        r_ratio=census.r / p if p else 0.0,
        degree_two_fraction=census.degree_pairs.get("1,1", 0) / p if p else 0.0,
        left_special=census.s_l,
        line_fraction={r: path_fraction(digraph, r) for r in config.all_radii},
        undirected_line_fraction={r: line_fraction_undirected(multigraph, r) for r in config.all_radii},
        cycle_counts=cycles.counts,
        moments=summary.moments,
        moment_gaps=summary.moment_gaps,
        second_moment_residual=second.residual,
        second_moment_passed=second.passed,
        ks_distance=summary.ks_distance,
    )
    if config.sentinel is None and (census.e_l or census.e_r):
        warnings.append(
            f"n={lower.n}: {census.e_l} left and {census.e_r} right non-prolongable words, likely truncation artifacts"
        )
    return row, warnings


def trend(values: Sequence[float], meets: Callable[[float], bool], lower_is_better: bool, tolerance: float) -> bool:
    """Threshold met at the last point and no deterioration beyond tolerance over the last three points."""
    tail = list(values[-3:])
    if not tail or not meets(tail[-1]):
        return False
    worsening = tail[-1] - tail[0] if lower_is_better else tail[0] - tail[-1]
    return worsening <= tolerance


def verdicts(
    rows: Sequence[ReportRow], prolongability: ProlongabilityDiagnostic, thresholds: Thresholds
) -> Verdicts:
    """Each verdict holds when its trend over the grid meets the threshold; see trend."""
    tolerance = thresholds.trend_tolerance
    ratios = [row.ratio if row.ratio is not None else float("inf") for row in rows]
    ratio = trend(ratios, lambda v: v <= thresholds.ratio, True, tolerance)
    line = trend(
        [row.line_fraction[thresholds.line_radius] for row in rows],
        lambda v: v >= thresholds.line_fraction,
        False,
        tolerance,
    )
    gaps = [max(row.moment_gaps[1 : thresholds.moment_order + 1]) for row in rows]
    moment = trend(gaps, lambda v: v <= thresholds.moment_gap, True, tolerance)

    consistent = ratio == line == moment
    pattern = not consistent and not prolongability.almost_prolongable
    notes = []
    if pattern:
        notes.append(
            "Verdicts disagree on a language that is not almost prolongable: the complexity ratio tends to 1 "
            "while the graphs do not converge to the line"
        )
    elif not consistent:
        notes.append("Verdicts disagree although the language is almost prolongable; extend the grid")
    return Verdicts(
        ratio_to_one=ratio,
        line_fraction_to_one=line,
        moments_to_arcsine=moment,
        almost_prolongable=prolongability.almost_prolongable,
        consistent=consistent,
        non_prolongable_pattern=pattern,
        notes=notes,
    )


async def analyze(source: WordSource, config: AnalysisConfig) -> ConvergenceReport:
    """Convergence report of the source over the configured grid."""
    report, _ = await analyze_slices(source, config)
    return report


async def analyze_slices(
    source: WordSource, config: AnalysisConfig
) -> tuple[ConvergenceReport, dict[int, LanguageSlice]]:
    """Like analyze, also handing back the slices the report was computed from."""
    pool = WORKERS.get()
    log.info("Analyzing %s on grid %s", describe(source, config.sentinel), config.n_grid)
    slices, length = await pool.run(collect_slices, source, config)

    results = await asyncio.gather(
        *(pool.run(analyze_point, slices[n], slices[n + 1], config) for n in config.n_grid)
    )
    rows = [row for row, _ in results]
    warnings = [warning for _, point_warnings in results for warning in point_warnings]
    for warning in warnings:
        log.warning("%s", warning)

    censuses = [prolongation_census(slices[n], slices[n + 1]) for n in config.n_grid]
    prolongability = almost_prolongable_diagnostic(censuses, config.thresholds.prolongable)
    report = ConvergenceReport(
        generator=describe(source, config.sentinel),
        prefix_length=length,
        config=config,
        rows=rows,
        prolongability=prolongability,
        verdicts=verdicts(rows, prolongability, config.thresholds),
        warnings=warnings,
    )
    return report, slices
