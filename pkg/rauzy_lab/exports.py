import csv
import json
import logging
import re
from collections.abc import Iterable, Sequence
from pathlib import Path

from pydantic import BaseModel

from rauzy_lab.exceptions import ConsistencyError
from rauzy_lab.language import LanguageSlice
from rauzy_lab.localstat import BallCensus
from rauzy_lab.measures import CylinderEstimate, FrequencyProfile, OscillationResult
from rauzy_lab.rauzy import Arc, RauzyDigraph
from rauzy_lab.report import ConvergenceReport, ReportRow
from rauzy_lab.spectra import SpectralSummary, group_multiplicities, spectral_histogram
from rauzy_lab.wordgen import Alphabet

log = logging.getLogger(__name__)

SLICE_HEADER = re.compile(r"^n=(?P<n>\d+) k=(?P<k>\d+)(?: alphabet=(?P<alphabet>\S+))?$")
GRAPH_HEADER = re.compile(r"^n=(?P<n>\d+) vertices=(?P<vertices>\d+) arcs=(?P<arcs>\d+)$")


def _prepare(path: Path) -> Path:
    path = Path(path).expanduser()
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_word(path: Path, word: str) -> Path:
    path = _prepare(path)
    path.write_bytes(word.encode("latin-1"))
    log.info("Wrote %d symbols to %s", len(word), path)
    return path


def write_slice(path: Path, slice_: LanguageSlice) -> Path:
    path = _prepare(path)
    with path.open("w", encoding="latin-1") as fp:
        fp.write(f"n={slice_.n} k={slice_.alphabet.k} alphabet={slice_.alphabet}\n")
        for word in slice_:
            fp.write(word + "\n")
    return path


def read_slice(path: Path) -> LanguageSlice:
    lines = Path(path).expanduser().read_text(encoding="latin-1").splitlines()
    match = SLICE_HEADER.match(lines[0]) if lines else None
    if match is None:
        raise ConsistencyError(f"{path} does not start with a slice header")
    words = tuple(line for line in lines[1:] if line)
    symbols = match["alphabet"] or "".join(sorted(set("".join(words))))
    alphabet = Alphabet(tuple(symbols))
    if alphabet.k != int(match["k"]):
        raise ConsistencyError(f"{path} declares k={match['k']} but carries alphabet {alphabet}")
    slice_ = LanguageSlice(int(match["n"]), words, alphabet)
    slice_.validate()
    return slice_


def write_edge_list(path: Path, digraph: RauzyDigraph) -> Path:
    path = _prepare(path)
    with path.open("w", encoding="latin-1") as fp:
        fp.write(f"n={digraph.n} vertices={digraph.vertex_count} arcs={len(digraph.arcs)}\n")
        for arc in digraph.arcs:
            fp.write(f"{digraph.vertices[arc.tail]} {digraph.vertices[arc.head]} {arc.label}\n")
    return path


def read_edge_list(path: Path, alphabet: Alphabet) -> RauzyDigraph:
    lines = Path(path).expanduser().read_text(encoding="latin-1").splitlines()
    match = GRAPH_HEADER.match(lines[0]) if lines else None
    if match is None:
        raise ConsistencyError(f"{path} does not start with a graph header")
    n = int(match["n"])
    triples = []
    for line in lines[1:]:
        if not line:
            continue
        parts = line.split(" ")
        if n == 0:
            # empty vertex words leave only the label
            parts = ["", "", parts[-1]]
        if len(parts) != 3:
            raise ConsistencyError(f"Malformed edge line {line!r} in {path}")
        triples.append(parts)

    vertices = tuple(sorted({tail for tail, _, _ in triples} | {head for _, head, _ in triples}))
    if len(vertices) != int(match["vertices"]):
        raise ConsistencyError(
            f"{path} declares {match['vertices']} vertices but its arcs touch {len(vertices)}; isolated words are lost"
        )
    index = {word: i for i, word in enumerate(vertices)}
    arcs = tuple(Arc(index[tail], index[head], label) for tail, head, label in triples)
    if len(arcs) != int(match["arcs"]):
        raise ConsistencyError(f"{path} declares {match['arcs']} arcs but holds {len(arcs)}")
    return RauzyDigraph(n, vertices, arcs, alphabet)


def _write_rows(path: Path, header: Sequence[str], rows: Iterable[Sequence[object]]) -> Path:
    path = _prepare(path)
    with path.open("w", newline="", encoding="utf-8") as fp:
        writer = csv.writer(fp)
        writer.writerow(header)
        writer.writerows(rows)
    return path


def write_census_csv(path: Path, census: BallCensus) -> Path:
    return _write_rows(path, ("ball_code", "count"), census.counts.items())


def write_model_json(path: Path, model: BaseModel) -> Path:
    path = _prepare(path)
    path.write_text(model.model_dump_json(indent=2) + "\n", encoding="utf-8")
    return path


def read_report(path: Path) -> ConvergenceReport:
    return ConvergenceReport.model_validate_json(Path(path).expanduser().read_text(encoding="utf-8"))


def write_rows_csv(path: Path, rows: Sequence[ReportRow], radii: Sequence[int]) -> Path:
    header = [
        "n",
        "p",
        "p_next",
        "ratio",
        "e_l_ratio",
        "e_r_ratio",
        "r_ratio",
        "degree_two_fraction",
        *(f"line_fraction_r{r}" for r in radii),
        *(f"undirected_line_fraction_r{r}" for r in radii),
        "max_moment_gap",
        "second_moment_residual",
        "ks_distance",
    ]
    return _write_rows(
        path,
        header,
        (
            [
                row.n,
                row.p,
                row.p_next,
                row.ratio,
                row.e_l_ratio,
                row.e_r_ratio,
                row.r_ratio,
                row.degree_two_fraction,
                *(row.line_fraction[r] for r in radii),
                *(row.undirected_line_fraction[r] for r in radii),
                max(row.moment_gaps[1:], default=0.0),
                row.second_moment_residual,
                "" if row.ks_distance is None else row.ks_distance,
            ]
            for row in rows
        ),
    )


def write_oscillation_csv(path: Path, result: OscillationResult) -> Path:
    return _write_rows(
        path, ("n", "frequency", "regime_tag"), ((row.n, row.frequency, row.regime_tag) for row in result.rows)
    )


def write_profile_csv(path: Path, profiles: Sequence[FrequencyProfile]) -> Path:
    return _write_rows(path, ("n", "inf", "sup"), ((item.n, item.inf, item.sup) for item in profiles))


def write_cylinders_csv(path: Path, estimates: Sequence[CylinderEstimate], gaps: Sequence[float]) -> Path:
    return _write_rows(
        path,
        ("n", "u", "suffix_frequency", "shift_invariance_gap"),
        ((item.n, item.u, item.suffix_frequency, gap) for item, gap in zip(estimates, gaps)),
    )


def write_spectrum(directory: Path, summary: SpectralSummary, bins: int = 40) -> list[Path]:
    directory = Path(directory).expanduser()
    paths = [_prepare(directory / f"moments-{summary.n}.json")]
    paths[0].write_text(json.dumps(summary.moments) + "\n", encoding="utf-8")
    if summary.eigenvalues is None:
        return paths
    paths.append(
        _write_rows(
            directory / f"spectrum-{summary.n}.csv",
            ("eigenvalue", "multiplicity"),
            group_multiplicities(summary.eigenvalues),
        )
    )
    edges, counts = spectral_histogram(summary.eigenvalues, bins)
    paths.append(
        _write_rows(
            directory / f"histogram-{summary.n}.csv",
            ("left", "right", "count"),
            ((left, right, count) for left, right, count in zip(edges, edges[1:], counts)),
        )
    )
    return paths
