import logging
from collections.abc import Sequence
from pathlib import Path

import argclass
from pydantic import BaseModel, Field

from rauzy_lab.commands import (
    SourceGroup,
    annotation_schedule,
    load_source,
    output_directory,
    select_source,
    split_words,
)
from rauzy_lab.context import WORKERS
from rauzy_lab.exceptions import ConfigurationError
from rauzy_lab.exports import (
    write_census_csv,
    write_cylinders_csv,
    write_edge_list,
    write_model_json,
    write_oscillation_csv,
    write_profile_csv,
    write_rows_csv,
    write_slice,
)
from rauzy_lab.language import LanguageSlice
from rauzy_lab.localstat import BallCensus, CycleCensus, census, cycle_components, undirected_census
from rauzy_lab.measures import (
    CylinderEstimate,
    FrequencyProfile,
    OscillationResult,
    cylinder_estimate,
    oscillation_prefix_length,
    shift_invariance_gap,
    uniform_frequency_profile,
    word_oscillation,
)
from rauzy_lab.rauzy import build_digraph, underlying_graph
from rauzy_lab.report import AnalysisConfig, Verdicts, analyze_slices, parse_int_list
from rauzy_lab.wordgen import CassaigneKabore, CKRegime, FullShift, WordSource, ck_regimes, prefix

log = logging.getLogger(__name__)

PROFILE_START = 16
DEFAULT_PREFIX_LENGTH = 1_000_000


class CensusExport(BaseModel):
    """Ball censuses of the largest grid point, directed and undirected."""

    n: int
    directed: list[BallCensus]
    undirected: list[BallCensus]
    cycles: CycleCensus


class AnalyzeOutput(BaseModel):
    directory: str
    files: list[str] = Field(description="Every artifact written, in order")
    verdicts: Verdicts


def census_export(lower: LanguageSlice, upper: LanguageSlice, radii: Sequence[int]) -> CensusExport:
    digraph = build_digraph(lower, upper)
    multigraph = underlying_graph(digraph)
    cycles = cycle_components(digraph)
    return CensusExport(
        n=lower.n,
        directed=[census(digraph, r) for r in radii],
        undirected=[undirected_census(multigraph, r, cycles) for r in radii],
        cycles=cycles,
    )


def cylinder_rows(
    slices: dict[int, LanguageSlice], grid: Sequence[int], words: Sequence[str]
) -> tuple[list[CylinderEstimate], list[float]]:
    estimates: list[CylinderEstimate] = []
    gaps: list[float] = []
    for n in grid:
        for u in words:
            if len(u) >= n:
                log.warning("Skipping cylinder %r at n=%d: it needs two offsets", u, n)
                continue
            estimate = cylinder_estimate(slices[n], u)
            estimates.append(estimate)
            gaps.append(shift_invariance_gap(estimate))
    return estimates, gaps


def oscillation_grid(regimes: Sequence[CKRegime], length: int, truncation_ratio: int) -> list[int]:
    """Midpoints of the open regimes that a prefix of this length can resolve."""
    grid = set()
    for regime in regimes:
        if not regime.valid:
            continue
        for low, high in (regime.first, regime.second):
            n = int((low + high) // 2)
            if (n + 1) * truncation_ratio <= length:
                grid.add(n)
            else:
                log.info("Regime midpoint n=%d of level %d needs a prefix beyond %d", n, regime.level, length)
    if not grid:
        raise ConfigurationError("No open regime fits the truncation guard; pass an explicit oscillation grid")
    return sorted(grid)


def geometric_grid(length: int, truncation_ratio: int) -> list[int]:
    grid = []
    n = PROFILE_START
    while (n + 1) * truncation_ratio <= length:
        grid.append(n)
        n *= 2
    if not grid:
        raise ConfigurationError(
            f"A prefix of {length} symbols is too short for oscillation at ratio {truncation_ratio}"
        )
    return grid


def frequency_profiles(word: str, u: str, truncation_ratio: int) -> list[FrequencyProfile]:
    profiles = []
    n = PROFILE_START
    while n * truncation_ratio <= len(word):
        profiles.append(uniform_frequency_profile(word, u, n))
        n *= 2
    return profiles


async def oscillation(
    source: WordSource,
    grid: Sequence[int],
    truncation_ratio: int,
    prefix_length: int = DEFAULT_PREFIX_LENGTH,
    schedule: CassaigneKabore | None = None,
) -> tuple[OscillationResult, list[FrequencyProfile]]:
    """Oscillation of the frequency of 0 on a prefix of the source.

    A ck: source is read on its own schedule, on a prefix sized by its depth.
    Any other word is read on prefix_length symbols; a schedule, when given,
    only tags the grid points with its regimes.
    """
    if isinstance(source, FullShift):
        raise ConfigurationError("Oscillation needs a single word; a full shift is only enumerated")
    pool = WORKERS.get()
    if isinstance(source, CassaigneKabore):
        schedule = source

    regimes: tuple[CKRegime, ...] = ()
    depth = 0
    if schedule is not None:
        depth = schedule.depth if schedule.depth is not None else 0
        if depth >= len(schedule.schedule):
            raise ConfigurationError(f"Oscillation depth {depth} needs schedule level {depth}")
        regimes = ck_regimes(schedule.schedule, depth)
    if isinstance(source, CassaigneKabore):
        prefix_length = oscillation_prefix_length(source.schedule, depth)

    word = await pool.run(prefix, source, prefix_length)
    if not grid and regimes:
        grid = oscillation_grid(regimes, len(word), truncation_ratio)
    elif not grid:
        grid = geometric_grid(len(word), truncation_ratio)
    result = await pool.run(
        word_oscillation,
        word,
        grid,
        "0",
        schedule.schedule if schedule is not None else None,
        depth,
        truncation_ratio,
    )
    profiles = await pool.run(frequency_profiles, word, "0", truncation_ratio)
    return result, profiles


async def run_analysis(
    source_text: str,
    config: AnalysisConfig,
    directory: Path,
    cylinders: Sequence[str] = (),
    with_oscillation: bool = False,
    oscillation_n: Sequence[int] = (),
    export_graphs: bool = False,
    schedule_text: str | None = None,
) -> AnalyzeOutput:
    """Write the convergence report and its tables; schedule_text names regimes for a word file."""
    pool = WORKERS.get()
    source = load_source(source_text)
    report, slices = await analyze_slices(source, config)

    files = [
        write_model_json(directory / "report.json", report),
        write_rows_csv(directory / "rows.csv", report.rows, config.all_radii),
    ]

    n = config.n_grid[-1]
    lower, upper = slices[n], slices[n + 1]
    censuses = await pool.run(census_export, lower, upper, config.all_radii)
    files.append(write_model_json(directory / f"census-{n}.json", censuses))
    for item in censuses.directed:
        files.append(write_census_csv(directory / f"census-{n}-r{item.radius}.csv", item))
    for item in censuses.undirected:
        files.append(write_census_csv(directory / f"census-{n}-r{item.radius}-undirected.csv", item))

    if export_graphs:
        files.append(write_slice(directory / f"slice-{n}.txt", lower))
        files.append(write_slice(directory / f"slice-{n + 1}.txt", upper))
        files.append(write_edge_list(directory / f"graph-{n}.txt", build_digraph(lower, upper)))

    if cylinders:
        estimates, gaps = cylinder_rows(slices, config.n_grid, cylinders)
        files.append(write_cylinders_csv(directory / "cylinders.csv", estimates, gaps))

    if with_oscillation:
        result, profiles = await oscillation(
            source,
            oscillation_n,
            config.truncation_ratio,
            config.prefix_length,
            annotation_schedule(schedule_text),
        )
        files.append(write_model_json(directory / "oscillation.json", result))
        files.append(write_oscillation_csv(directory / "oscillation.csv", result))
        files.append(write_profile_csv(directory / "profile.csv", profiles))

    for path in files:
        log.debug("Wrote %s", path)
    return AnalyzeOutput(directory=str(directory), files=[str(path) for path in files], verdicts=report.verdicts)


class ThresholdGroup(argclass.Group):
    ratio: float = argclass.Argument(default=1.05, help="Largest p(n+1)/p(n) counted as tending to 1")
    line_fraction: float = argclass.Argument(default=0.9, help="Smallest line fraction counted as tending to 1")
    line_radius: int = argclass.Argument(default=2, help="Ball radius of the line fraction verdict")
    moment_gap: float = argclass.Argument(default=0.5, help="Largest moment gap to the arcsine law")
    moment_order: int = argclass.Argument(default=4, help="Moments up to this order enter the verdict")
    prolongable: float = argclass.Argument(default=0.1, help="Largest e_l/p and e_r/p when almost prolongable")
    trend_tolerance: float = argclass.Argument(default=0.01, help="Allowed deterioration over the last grid points")


class AnalyzeCommand(argclass.Parser):
    word_source: SourceGroup = SourceGroup(title="Word source", prefix="")
    prefix_length: int = argclass.Argument(
        "--prefix-length", "--length", default=DEFAULT_PREFIX_LENGTH, help="Prefix length N scanned for factors"
    )
    n: str = argclass.Argument(default="10,50,100,200", help="Ascending comma separated grid of n")
    radii: str = argclass.Argument(default="1,2,3", help="Ball radii for the local statistics")
    moments: int = argclass.Argument(default=8, help="Highest walk count moment")
    eigen_cap: int = argclass.Argument(default=4096, help="Largest p(n) handed to the dense eigensolver")
    truncation_ratio: int = argclass.Argument(default=100, help="Require n <= N / ratio")
    sentinel: str = argclass.Argument(default="", help="Adjoin this fresh letter as a sentinel")
    cylinders: str = argclass.Argument(default="", help="Comma separated words u for cylinder estimates")
    # flags: --oscillation runs the frequency oscillation analysis,
    # --export-graphs writes slices and the largest digraph
    oscillation: bool = False
    oscillation_n: str = argclass.Argument(
        default="", help="Oscillation grid, default regime midpoints or powers of two"
    )
    export_graphs: bool = False
    thresholds: ThresholdGroup = ThresholdGroup(title="Verdict thresholds")

    def config(self) -> AnalysisConfig:
        thresholds = self.thresholds
        return AnalysisConfig.build(
            prefix_length=self.prefix_length,
            n_grid=self.n,
            radii=self.radii,
            moments=self.moments,
            eigen_cap=self.eigen_cap,
            truncation_ratio=self.truncation_ratio,
            sentinel=self.sentinel or None,
            thresholds={
                "ratio": thresholds.ratio,
                "line_fraction": thresholds.line_fraction,
                "line_radius": thresholds.line_radius,
                "moment_gap": thresholds.moment_gap,
                "moment_order": thresholds.moment_order,
                "prolongable": thresholds.prolongable,
                "trend_tolerance": thresholds.trend_tolerance,
            },
        )

    async def __call__(self) -> int:
        try:
            oscillation_n = parse_int_list(self.oscillation_n)
        except ValueError as e:
            raise ConfigurationError(str(e)) from e
        source_text, schedule_text = select_source(self.word_source, with_schedule=True)
        output = await run_analysis(
            source_text,
            self.config(),
            output_directory(self),
            cylinders=split_words(self.cylinders),
            with_oscillation=self.oscillation,
            oscillation_n=oscillation_n,
            export_graphs=self.export_graphs,
            schedule_text=schedule_text,
        )
        log.info("Wrote %d artifacts to %s", len(output.files), output.directory)
        for name, value in output.verdicts.model_dump(exclude={"notes"}).items():
            log.info("%s: %s", name, value)
        for note in output.verdicts.notes:
            log.warning("%s", note)
        return 0
