import os
from pathlib import Path
from typing import Any

import argclass

from rauzy_lab.exceptions import ConfigurationError
from rauzy_lab.wordgen import CassaigneKabore, WordSource, decode_source

JOBS_ENV = "RAUZY_LAB_JOBS"

SOURCE_HELP = (
    "Word source: substitution:0>01,1>0;seed=0 | sturmian:golden | sturmian:<alpha> | "
    "ck:desk;depth=3 | ck:<l>x<m>x<n>,... | full-shift:<k> | periodic:<pattern> | file:<path>"
)


class SourceGroup(argclass.Group):
    """One word source, either as --source text or through the dedicated flags."""

    source: str = argclass.Argument(default="", help=SOURCE_HELP)
    word: str = argclass.Argument(default="", help="Word file, one byte per symbol")
    full_shift: int = argclass.Argument(default=0, help="Full shift on this many letters")
    substitution: str = argclass.Argument(default="", help="Substitution images, e.g. 0:01,1:0")
    seed: str = argclass.Argument(default="", help="Seed letter of the substitution fixed point")
    sturmian_alpha: str = argclass.Argument(default="", help="Sturmian slope: golden or a decimal in (0, 1)")
    ck_schedule: str = argclass.Argument(
        default="", help="Cassaigne-Kabore schedule: desk, asymptotic or <l>x<m>x<n>,..."
    )
    depth: int = argclass.Argument(default=-1, help="Cassaigne-Kabore depth; -1 keeps the whole schedule")


def output_directory(command: Any) -> Path:
    return Path(command.__parent__.output).expanduser()


def resolve_jobs(requested: int) -> int:
    """RAUZY_LAB_JOBS wins over --jobs."""
    value = os.getenv(JOBS_ENV, "").strip()
    return int(value) if value.isdigit() else requested


def load_source(text: str) -> WordSource:
    return decode_source(text)


def _schedule_text(group: SourceGroup) -> str:
    if group.depth < -1:
        raise ConfigurationError(f"--depth must be -1 or a level of the schedule, got {group.depth}")
    return f"ck:{group.ck_schedule}" + (f";depth={group.depth}" if group.depth >= 0 else "")


def select_source(group: SourceGroup, with_schedule: bool = False) -> tuple[str, str | None]:
    """Source text for decode_source, and a schedule text annotating a word file.

    Exactly one source is accepted. With with_schedule, --ck-schedule may also
    accompany --word: the file is analyzed and the schedule only names regimes.
    """
    if group.full_shift < 0:
        raise ConfigurationError(f"--full-shift must be positive, got {group.full_shift}")
    if group.seed and not group.substitution:
        raise ConfigurationError("--seed needs --substitution")
    if group.depth != -1 and not group.ck_schedule:
        raise ConfigurationError("--depth needs --ck-schedule")

    schedule = None
    if with_schedule and group.word and group.ck_schedule:
        schedule = _schedule_text(group)
        load_source(schedule)

    given: dict[str, str] = {}
    if group.source:
        given["--source"] = group.source
    if group.word:
        given["--word"] = f"file:{group.word}"
    if group.full_shift:
        given["--full-shift"] = f"full-shift:{group.full_shift}"
    if group.substitution:
        given["--substitution"] = f"substitution:{group.substitution}" + (
            f";seed={group.seed}" if group.seed else ""
        )
    if group.sturmian_alpha:
        given["--sturmian-alpha"] = f"sturmian:{group.sturmian_alpha}"
    if group.ck_schedule and schedule is None:
        given["--ck-schedule"] = _schedule_text(group)

    if not given:
        raise ConfigurationError(
            "No word source: pass one of --source, --word, --full-shift, --substitution, "
            "--sturmian-alpha or --ck-schedule"
        )
    if len(given) > 1:
        raise ConfigurationError(f"Word source flags are mutually exclusive, got {', '.join(given)}")
    (text,) = given.values()
    return text, schedule


def annotation_schedule(text: str | None) -> CassaigneKabore | None:
    if text is None:
        return None
    source = load_source(text)
    if not isinstance(source, CassaigneKabore):
        raise ConfigurationError(f"Expected a Cassaigne-Kabore schedule, got {text!r}")
    return source


def split_words(text: str) -> list[str]:
    return [item for item in text.replace(" ", "").split(",") if item]
