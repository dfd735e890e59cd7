"""Tests for rauzy_lab.__main__ module."""

import os
import subprocess
import sys
from pathlib import Path

import pytest

from rauzy_lab.arguments import Parser, config_files
from rauzy_lab.commands import JOBS_ENV, resolve_jobs, select_source
from rauzy_lab.exceptions import ConfigurationError
from rauzy_lab.wordgen import DESK_SCHEDULE, CassaigneKabore, prefix


def cli_env(config: str = "/nonexistent/config.ini") -> dict[str, str]:
    env = os.environ.copy()
    env.pop(JOBS_ENV, None)
    # Point to non-existent config file so local settings do not leak in
    env["RAUZY_LAB_CONFIG"] = config
    return env


def run_cli(*args: str, config: str = "/nonexistent/config.ini") -> subprocess.CompletedProcess[str]:
    return subprocess.run(
        [sys.executable, "-m", "rauzy_lab", *args],
        capture_output=True,
        text=True,
        env=cli_env(config),
    )


class TestParser:
    """Tests for Parser argument parsing."""

    def test_parser_default_values(self) -> None:
        parser = Parser()
        parser.parse_args(["generate", "--source", "periodic:01"])

        assert parser.output == Path("rauzy-out")
        assert parser.jobs == 0
        assert parser.generate is not None
        assert parser.generate.word_source.source == "periodic:01"
        assert parser.generate.length == 0
        assert parser.generate.name == "word.txt"
        assert select_source(parser.generate.word_source) == ("periodic:01", None)

    def test_analyze_options(self) -> None:
        parser = Parser()
        parser.parse_args(
            [
                "--output=/tmp/rauzy",
                "--jobs=3",
                "analyze",
                "--source=sturmian:golden",
                "--n=100,200",
                "--sentinel=2",
                "--oscillation",
                "--thresholds-line-radius=3",
            ]
        )

        assert parser.output == Path("/tmp/rauzy")
        assert parser.jobs == 3
        assert parser.analyze is not None
        assert parser.analyze.oscillation
        assert not parser.analyze.export_graphs
        config = parser.analyze.config()
        assert config.n_grid == [100, 200]
        assert config.sentinel == "2"
        assert config.thresholds.line_radius == 3
        assert config.all_radii == [1, 2, 3]

    def test_spectrum_options(self) -> None:
        parser = Parser()
        parser.parse_args(["spectrum", "--source=full-shift:2", "--n=4,6", "--bins=12"])

        assert parser.spectrum is not None
        assert parser.spectrum.n == "4,6"
        assert parser.spectrum.bins == 12

    @pytest.mark.parametrize(
        "argv,expected",
        [
            (
                ["generate", "--substitution", "0:01,1:0", "--seed", "0", "--length", "1000000"],
                "substitution:0:01,1:0;seed=0",
            ),
            (["generate", "--sturmian-alpha", "0.6180339887", "--length", "1000000"], "sturmian:0.6180339887"),
            (["generate", "--ck-schedule", "desk", "--depth", "3"], "ck:desk;depth=3"),
            (["generate", "--ck-schedule", "desk"], "ck:desk"),
            (["analyze", "--word", "fib.txt", "--n", "10,50,100,200"], "file:fib.txt"),
            (["analyze", "--full-shift", "2", "--n", "4,6,8,10"], "full-shift:2"),
            (["spectrum", "--word", "fib.txt"], "file:fib.txt"),
        ],
    )
    def test_source_flags(self, argv: list[str], expected: str) -> None:
        parser = Parser()
        parser.parse_args(argv)
        command = getattr(parser, argv[0])
        assert select_source(command.word_source, with_schedule=True) == (expected, None)

    def test_length_sets_the_prefix(self) -> None:
        parser = Parser()
        parser.parse_args(["analyze", "--word", "fib.txt", "--length", "5000"])
        assert parser.analyze.prefix_length == 5000

    def test_word_with_schedule(self) -> None:
        parser = Parser()
        parser.parse_args(["analyze", "--word", "ck.txt", "--ck-schedule", "desk", "--oscillation"])
        assert select_source(parser.analyze.word_source, with_schedule=True) == ("file:ck.txt", "ck:desk")


class TestSelectSource:
    @pytest.mark.parametrize(
        "argv",
        [
            ["generate"],
            ["generate", "--source", "periodic:01", "--full-shift", "2"],
            ["generate", "--word", "ck.txt", "--ck-schedule", "desk"],
            ["generate", "--seed", "0", "--sturmian-alpha", "golden"],
            ["generate", "--depth", "3", "--word", "ck.txt"],
            ["generate", "--full-shift", "-2"],
            ["generate", "--ck-schedule", "desk", "--depth", "-4"],
        ],
    )
    def test_rejected(self, argv: list[str]) -> None:
        parser = Parser()
        parser.parse_args(argv)
        with pytest.raises(ConfigurationError):
            select_source(parser.generate.word_source)

    def test_schedule_must_parse(self) -> None:
        parser = Parser()
        parser.parse_args(["analyze", "--word", "ck.txt", "--ck-schedule", "2x64"])
        with pytest.raises(ConfigurationError):
            select_source(parser.analyze.word_source, with_schedule=True)


class TestConfigFiles:
    def test_missing_file_is_passed_through(self, tmp_path: Path) -> None:
        path = tmp_path / "config.ini"
        with config_files(path) as files:
            assert files == [str(path)]

    def test_sectioned_file_is_passed_through(self, tmp_path: Path) -> None:
        path = tmp_path / "config.ini"
        path.write_text("[DEFAULT]\noutput = /tmp/x\n")
        with config_files(path) as files:
            assert files == [str(path)]

    def test_headerless_file_reads_as_default_section(self, tmp_path: Path) -> None:
        path = tmp_path / "config.ini"
        path.write_text("output=/tmp/x\njobs=4\n")
        with config_files(path) as files:
            copy = Path(files[0])
            assert copy != path
            assert copy.read_text() == "[DEFAULT]\noutput=/tmp/x\njobs=4\n"
        assert not copy.exists()

    def test_broken_file(self, tmp_path: Path) -> None:
        path = tmp_path / "config.ini"
        path.write_text("[DEFAULT]\nthis line has no separator\n")
        with pytest.raises(ConfigurationError), config_files(path):
            pass


class TestResolveJobs:
    def test_environment_wins(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setenv(JOBS_ENV, "4")
        assert resolve_jobs(2) == 4

    def test_flag_without_environment(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.delenv(JOBS_ENV, raising=False)
        assert resolve_jobs(2) == 2

    def test_garbage_is_ignored(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setenv(JOBS_ENV, "many")
        assert resolve_jobs(2) == 2


class TestCLI:
    """Integration tests for CLI entry point."""

    def test_cli_help(self) -> None:
        result = subprocess.run(
            [sys.executable, "-m", "rauzy_lab", "--help"],
            capture_output=True,
            text=True,
            env=cli_env(),
        )

        assert result.returncode == 0
        assert "usage:" in result.stdout.lower()

    def test_cli_generate(self, tmp_path: Path) -> None:
        result = subprocess.run(
            [
                sys.executable,
                "-m",
                "rauzy_lab",
                f"--output={tmp_path}",
                "generate",
                "--source=periodic:01",
                "--length=10",
            ],
            capture_output=True,
            text=True,
            env=cli_env(),
        )

        assert result.returncode == 0, result.stderr
        assert (tmp_path / "word.txt").read_text() == "0101010101"

    def test_cli_bad_source_exits_with_configuration_code(self, tmp_path: Path) -> None:
        result = subprocess.run(
            [sys.executable, "-m", "rauzy_lab", f"--output={tmp_path}", "generate", "--source=thue-morse"],
            capture_output=True,
            text=True,
            env=cli_env(),
        )

        assert result.returncode == 2
        assert "Unknown source kind" in result.stderr

    def test_cli_analyze_full_shift(self, tmp_path: Path) -> None:
        result = subprocess.run(
            [
                sys.executable,
                "-m",
                "rauzy_lab",
                f"--output={tmp_path}",
                "--jobs=2",
                "analyze",
                "--source=full-shift:2",
                "--n=4,6",
                "--radii=1,2",
            ],
            capture_output=True,
            text=True,
            env=cli_env(),
        )

        assert result.returncode == 0, result.stderr
        assert (tmp_path / "report.json").exists()
        assert (tmp_path / "rows.csv").exists()

    def test_cli_sturmian_alpha(self, tmp_path: Path) -> None:
        result = run_cli(f"--output={tmp_path}", "generate", "--sturmian-alpha", "0.6180339887", "--length", "1000")

        assert result.returncode == 0, result.stderr
        word = (tmp_path / "word.txt").read_text()
        assert len(word) == 1000
        assert set(word) == {"0", "1"}

    def test_cli_ck_depth(self, tmp_path: Path) -> None:
        result = run_cli(
            f"--output={tmp_path}", "generate", "--ck-schedule", "desk", "--depth", "1", "--length", "500"
        )

        assert result.returncode == 0, result.stderr
        expected = prefix(CassaigneKabore(DESK_SCHEDULE), 500)
        assert (tmp_path / "word.txt").read_text() == expected

    def test_cli_full_shift_flag(self, tmp_path: Path) -> None:
        result = run_cli(f"--output={tmp_path}", "analyze", "--full-shift", "2", "--n", "4,6", "--radii", "1")

        assert result.returncode == 0, result.stderr
        assert (tmp_path / "report.json").exists()

    def test_cli_oscillation_of_a_word_file(self, tmp_path: Path) -> None:
        word_path = tmp_path / "ck.txt"
        word_path.write_text(prefix(CassaigneKabore(DESK_SCHEDULE), 50_000))
        output = tmp_path / "out"

        result = run_cli(
            f"--output={output}",
            "analyze",
            "--word",
            str(word_path),
            "--length",
            "50000",
            "--n",
            "10,20",
            "--radii",
            "1",
            "--cylinders",
            "0,1,00",
            "--oscillation",
        )

        assert result.returncode == 0, result.stderr
        assert (output / "oscillation.csv").exists()
        assert (output / "cylinders.csv").exists()

    def test_cli_two_sources_exit_with_configuration_code(self, tmp_path: Path) -> None:
        result = run_cli(f"--output={tmp_path}", "generate", "--source", "periodic:01", "--full-shift", "2")

        assert result.returncode == 2
        assert "mutually exclusive" in result.stderr

    @pytest.mark.parametrize(
        "args",
        [
            ("generate", "--source", "ck:desk;depth=x", "--length", "100"),
            ("generate", "--source", "periodic:01", "--length", "-5"),
            ("spectrum", "--source", "sturmian:golden", "--n", "10", "--bins", "0"),
            ("analyze", "--full-shift", "-2", "--n", "4,6"),
        ],
    )
    def test_cli_bad_values_exit_with_configuration_code(self, tmp_path: Path, args: tuple[str, ...]) -> None:
        result = run_cli(f"--output={tmp_path}", *args)

        assert result.returncode == 2, result.stderr
        assert list(tmp_path.iterdir()) == []

    def test_cli_headerless_config(self, tmp_path: Path) -> None:
        config = tmp_path / "config.ini"
        config.write_text(f"output = {tmp_path / 'configured'}\n")

        result = run_cli("generate", "--source", "periodic:01", "--length", "4", config=str(config))

        assert result.returncode == 0, result.stderr
        assert (tmp_path / "configured" / "word.txt").read_text() == "0101"

    def test_cli_malformed_config(self, tmp_path: Path) -> None:
        config = tmp_path / "config.ini"
        config.write_text("[DEFAULT]\noutput\n")

        result = run_cli(f"--output={tmp_path / 'out'}", "generate", "--source", "periodic:01", config=str(config))

        assert result.returncode == 2
        assert "Cannot parse config file" in result.stderr
        assert not (tmp_path / "out").exists()
