import configparser
import os
import tempfile
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path

import argclass

from rauzy_lab.commands.analyze import AnalyzeCommand
from rauzy_lab.commands.generate import GenerateCommand
from rauzy_lab.commands.spectrum import SpectrumCommand
from rauzy_lab.exceptions import ConfigurationError

CONFIG_ENV = "RAUZY_LAB_CONFIG"
DEFAULT_CONFIG = "~/.config/rauzy_lab/config.ini"


class Parser(argclass.Parser):
    output: Path = argclass.Argument(default=Path("rauzy-out"), help="Directory for every written artifact")
    jobs: int = argclass.Argument(
        default=0,
        help="Worker threads for per-n analyses; 0 uses the available parallelism",
    )

    log_level: int = argclass.LogLevel
    generate: GenerateCommand | None = GenerateCommand()
    analyze: AnalyzeCommand | None = AnalyzeCommand()
    spectrum: SpectrumCommand | None = SpectrumCommand()


def config_path() -> Path:
    return Path(os.getenv(CONFIG_ENV, DEFAULT_CONFIG)).expanduser()


@contextmanager
def config_files(path: Path) -> Iterator[list[str]]:
    """Config files to hand to the parser.

    Plain key=value lines without a section header are read as [DEFAULT]
    through a temporary copy that lives as long as the context.
    """
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        yield [str(path)]
        return
    except OSError as e:
        raise ConfigurationError(f"Cannot read config file {path}: {e}") from e

    try:
        configparser.ConfigParser().read_string(text, source=str(path))
    except configparser.MissingSectionHeaderError:
        with tempfile.TemporaryDirectory(prefix="rauzy-lab-") as directory:
            copy = Path(directory) / path.name
            copy.write_text("[DEFAULT]\n" + text, encoding="utf-8")
            yield [str(copy)]
        return
    except configparser.Error as e:
        raise ConfigurationError(f"Cannot parse config file {path}: {e}") from e
    yield [str(path)]
