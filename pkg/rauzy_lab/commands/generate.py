import logging
from pathlib import Path

import argclass
from pydantic import BaseModel, Field

from rauzy_lab.commands import SourceGroup, load_source, output_directory, select_source
from rauzy_lab.context import WORKERS
from rauzy_lab.exceptions import ConfigurationError
from rauzy_lab.exports import write_model_json, write_word
from rauzy_lab.wordgen import (
    CassaigneKabore,
    CKLevel,
    CKRegime,
    WordSource,
    ck_lengths_and_zero_counts,
    ck_regimes,
    encode_source,
    prefix,
    validate_schedule,
)

log = logging.getLogger(__name__)

DEFAULT_LENGTH = 1_000_000


class ScheduleReport(BaseModel):
    """Lengths, zero counts and regimes of a Cassaigne-Kabore schedule."""

    schedule: list[tuple[int, int, int]]
    depth: int
    levels: list[CKLevel]
    regimes: list[CKRegime]
    problems: list[str] = Field(description="Levels with an empty regime; empty for a validated schedule")


class GenerateOutput(BaseModel):
    source: str
    path: str
    length: int
    schedule: str | None = Field(default=None, description="Path of schedule.json for CK sources")
    problems: list[str] = Field(default_factory=list)


def default_length(source: WordSource, length: int) -> int:
    """Explicit length, else |u_depth| for CK sources with a depth, else one million symbols."""
    if length < 0:
        raise ConfigurationError(f"Length must be positive, or 0 for the default, got {length}")
    if length > 0:
        return length
    if isinstance(source, CassaigneKabore) and source.depth is not None:
        return ck_lengths_and_zero_counts(source.schedule, source.depth)[-1].u_length
    return DEFAULT_LENGTH


def schedule_report(source: CassaigneKabore) -> ScheduleReport:
    depth = source.depth if source.depth is not None else len(source.schedule)
    analyzed = min(depth, len(source.schedule) - 1)
    return ScheduleReport(
        schedule=list(source.schedule),
        depth=depth,
        levels=list(ck_lengths_and_zero_counts(source.schedule, depth)),
        regimes=list(ck_regimes(source.schedule, analyzed)),
        problems=validate_schedule(source.schedule, analyzed + 1),
    )


async def generate(source_text: str, length: int, directory: Path, name: str = "word.txt") -> GenerateOutput:
    """Write a prefix of the source; CK sources also get schedule.json."""
    pool = WORKERS.get()
    source = load_source(source_text)
    size = default_length(source, length)

    word = await pool.run(prefix, source, size)
    path = await pool.run(write_word, directory / name, word)
    output = GenerateOutput(source=encode_source(source), path=str(path), length=len(word))

    if isinstance(source, CassaigneKabore):
        report = schedule_report(source)
        output.schedule = str(write_model_json(directory / "schedule.json", report))
        output.problems = report.problems
        for problem in report.problems:
            log.warning("Schedule %s: %s", output.source, problem)
    return output


class GenerateCommand(argclass.Parser):
    word_source: SourceGroup = SourceGroup(title="Word source", prefix="")
    length: int = argclass.Argument(
        default=0,
        help="Prefix length; 0 means |u_depth| for CK sources with a depth and 1000000 otherwise",
    )
    name: str = argclass.Argument(default="word.txt", help="File name inside the output directory")

    async def __call__(self) -> int:
        source_text, _ = select_source(self.word_source)
        output = await generate(source_text, self.length, output_directory(self), self.name)
        log.info("Wrote %d symbols of %s to %s", output.length, output.source, output.path)
        if output.problems:
            log.warning("Schedule validation found %d problem(s), see %s", len(output.problems), output.schedule)
        return 0
