import asyncio
import logging
from pathlib import Path

import argclass
from pydantic import BaseModel

from rauzy_lab.commands import SourceGroup, load_source, output_directory, select_source
from rauzy_lab.context import WORKERS
from rauzy_lab.exceptions import ConfigurationError
from rauzy_lab.exports import write_spectrum
from rauzy_lab.language import LanguageSlice
from rauzy_lab.rauzy import build_digraph, underlying_graph
from rauzy_lab.report import AnalysisConfig, collect_slices
from rauzy_lab.spectra import SpectralSummary, spectral_summary

log = logging.getLogger(__name__)


class SpectrumOutput(BaseModel):
    directory: str
    summaries: list[SpectralSummary]
    files: list[str]


def summarize(lower: LanguageSlice, upper: LanguageSlice, config: AnalysisConfig) -> SpectralSummary:
    multigraph = underlying_graph(build_digraph(lower, upper, labelled=False))
    return spectral_summary(multigraph, lower.n, config.moments, config.eigen_cap)


async def run_spectrum(source_text: str, config: AnalysisConfig, directory: Path, bins: int = 40) -> SpectrumOutput:
    """Moments, eigenvalues and histograms of the undirected Rauzy graphs on the grid."""
    if bins < 1:
        raise ConfigurationError(f"Histogram needs at least one bin, got {bins}")
    pool = WORKERS.get()
    source = load_source(source_text)
    slices, _ = await pool.run(collect_slices, source, config)
    summaries = await asyncio.gather(
        *(pool.run(summarize, slices[n], slices[n + 1], config) for n in config.n_grid)
    )

    files: list[Path] = []
    for summary in summaries:
        if summary.eigenvalues is None and summary.vertex_count:
            log.warning("n=%d: only moments written, %d vertices exceed the cap", summary.n, summary.vertex_count)
        files.extend(write_spectrum(directory, summary, bins))
    return SpectrumOutput(directory=str(directory), summaries=list(summaries), files=[str(path) for path in files])


class SpectrumCommand(argclass.Parser):
    word_source: SourceGroup = SourceGroup(title="Word source", prefix="")
    prefix_length: int = argclass.Argument(
        "--prefix-length", "--length", default=1_000_000, help="Prefix length N scanned for factors"
    )
    n: str = argclass.Argument(default="10,50,100,200", help="Ascending comma separated grid of n")
    moments: int = argclass.Argument(default=8, help="Highest walk count moment")
    eigen_cap: int = argclass.Argument(default=4096, help="Largest p(n) handed to the dense eigensolver")
    truncation_ratio: int = argclass.Argument(default=100, help="Require n <= N / ratio")
    sentinel: str = argclass.Argument(default="", help="Adjoin this fresh letter as a sentinel")
    bins: int = argclass.Argument(default=40, help="Histogram bins over [-2, 2] or the spectral range")

    async def __call__(self) -> int:
        config = AnalysisConfig.build(
            prefix_length=self.prefix_length,
            n_grid=self.n,
            moments=self.moments,
            eigen_cap=self.eigen_cap,
            truncation_ratio=self.truncation_ratio,
            sentinel=self.sentinel or None,
        )
        source_text, _ = select_source(self.word_source)
        output = await run_spectrum(source_text, config, output_directory(self), self.bins)
        for summary in output.summaries:
            log.info("n=%d: p=%d, ks=%s", summary.n, summary.vertex_count, summary.ks_distance)
        return 0
