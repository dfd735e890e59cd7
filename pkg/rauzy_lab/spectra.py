import logging
import math
from collections.abc import Sequence
from fractions import Fraction

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, Field
from scipy import stats

from rauzy_lab.exceptions import ConfigurationError, ConsistencyError
from rauzy_lab.rauzy import Multigraph

log = logging.getLogger(__name__)

DEFAULT_EIGEN_CAP = 4096
DEFAULT_MOMENTS = 8
# walk counts stay exact in int64 below this bound
INT64_SAFE = 2**62


class SpectralSummary(BaseModel):
    n: int
    vertex_count: int = Field(description="p(n)")
    walk_counts: list[int] = Field(description="trace(A^j) for j = 0..M")
    moments: list[float] = Field(description="m_j = trace(A^j) / p(n)")
    moment_gaps: list[float] = Field(description="|m_j - arcsine_j|")
    eigenvalues: list[float] | None = Field(default=None, description="Ascending eigenvalues, when computed")
    ks_distance: float | None = Field(default=None, description="Kolmogorov-Smirnov distance to the arcsine law")

    @property
    def exact_moments(self) -> list[Fraction]:
        return [Fraction(count, self.vertex_count) for count in self.walk_counts]


class SecondMomentCheck(BaseModel):
    residual: int = Field(description="|m_2 p(n) - 2 p(n+1)|")
    bound: int = Field(description="4k^2 + 4k")
    passed: bool


def walk_counts(graph: Multigraph, order: int, block: int = 256) -> list[int]:
    """trace(A^j) for j = 0..order, by multiplying A against blocks of basis vectors."""
    if order < 2:
        raise ConfigurationError(f"Moment order must be at least 2, got {order}")
    size = graph.vertex_count
    traces = [size] + [0] * order
    if not size:
        return traces

    adjacency = graph.adjacency()
    max_degree = int(adjacency.sum(axis=1).max()) if adjacency.nnz else 0
    exact = size * max_degree**order < INT64_SAFE
    dense = None
    if not exact:
        log.info("Walk counts may exceed int64 at order %d; using Python integers", order)
        dense = adjacency.toarray().astype(object)

    for start in range(0, size, block):
        width = min(block, size - start)
        rows = np.arange(start, start + width)
        columns = np.arange(width)
        if exact:
            vectors: NDArray = np.zeros((size, width), dtype=np.int64)
        else:
            vectors = np.zeros((size, width), dtype=object)
        vectors[rows, columns] = 1
        for j in range(1, order + 1):
            vectors = adjacency @ vectors if dense is None else dense.dot(vectors)
            traces[j] += int(sum(vectors[rows, columns].tolist()))
    return traces


def moments(graph: Multigraph, order: int = DEFAULT_MOMENTS) -> list[Fraction]:
    if not graph.vertex_count:
        raise ConfigurationError("Moments of an empty graph are undefined")
    return [Fraction(count, graph.vertex_count) for count in walk_counts(graph, order)]


def dense_spectrum(graph: Multigraph, cap: int = DEFAULT_EIGEN_CAP) -> NDArray[np.float64]:
    if graph.vertex_count > cap:
        raise ConfigurationError(f"Dense eigensolve of {graph.vertex_count} vertices exceeds the cap {cap}")
    if not graph.vertex_count:
        return np.zeros(0)
    matrix = graph.adjacency().toarray().astype(np.float64)
    return np.sort(np.linalg.eigvalsh(matrix))


def group_multiplicities(eigenvalues: Sequence[float], tolerance: float = 1e-8) -> list[tuple[float, int]]:
    groups: list[tuple[float, int]] = []
    for value in sorted(eigenvalues):
        if groups and abs(value - groups[-1][0]) <= tolerance * max(1.0, abs(value)):
            head, count = groups[-1]
            groups[-1] = (head, count + 1)
        else:
            groups.append((float(value), 1))
    return groups


def arcsine_reference(order: int) -> list[int]:
    """Moments of the density 1/(pi sqrt(4 - x^2)) on [-2, 2]."""
    return [math.comb(j, j // 2) if j % 2 == 0 else 0 for j in range(order + 1)]


def arcsine_cdf(x: NDArray[np.float64] | float) -> NDArray[np.float64]:
    clipped = np.clip(np.asarray(x, dtype=np.float64) / 2.0, -1.0, 1.0)
    return np.asarray(0.5 + np.arcsin(clipped) / np.pi)


def ks_distance(eigenvalues: Sequence[float] | NDArray[np.float64]) -> float:
    values = np.asarray(eigenvalues, dtype=np.float64)
    if not values.size:
        raise ConfigurationError("KS distance needs at least one eigenvalue")
    return float(stats.kstest(values, arcsine_cdf).statistic)


def second_moment_identity(summary: SpectralSummary, p: int, p_next: int, k: int) -> SecondMomentCheck:
    if len(summary.walk_counts) < 3:
        raise ConfigurationError("Second moment was not computed")
    if summary.vertex_count != p:
        raise ConfigurationError(f"Summary has {summary.vertex_count} vertices but p(n)={p}")
    residual = abs(summary.walk_counts[2] - 2 * p_next)
    bound = 4 * k * k + 4 * k
    return SecondMomentCheck(residual=residual, bound=bound, passed=residual <= bound)


def check_moment_consistency(counts: Sequence[int], eigenvalues: NDArray[np.float64], tolerance: float = 1e-8) -> None:
    size = len(eigenvalues)
    for j, count in enumerate(counts):
        moment = count / size
        spectral = float(np.sum(eigenvalues**j)) / size
        if abs(spectral - moment) > tolerance * max(1.0, abs(moment)):
            raise ConsistencyError(f"Spectral moment {j} is {spectral!r}, walk count moment is {moment!r}")


def spectral_summary(
    graph: Multigraph,
    n: int,
    order: int = DEFAULT_MOMENTS,
    cap: int = DEFAULT_EIGEN_CAP,
) -> SpectralSummary:
    counts = walk_counts(graph, order)
    size = graph.vertex_count
    values = [float(Fraction(count, size)) for count in counts] if size else [0.0] * len(counts)
    reference = arcsine_reference(order)
    eigenvalues = None
    distance = None
    if 0 < size <= cap:
        spectrum = dense_spectrum(graph, cap)
        check_moment_consistency(counts, spectrum)
        eigenvalues = spectrum.tolist()
        distance = ks_distance(spectrum)
    elif size > cap:
        log.warning("Skipping dense eigensolve at n=%d: %d vertices exceed the cap %d", n, size, cap)
    return SpectralSummary(
        n=n,
        vertex_count=size,
        walk_counts=counts,
        moments=values,
        moment_gaps=[abs(value - ref) for value, ref in zip(values, reference)],
        eigenvalues=eigenvalues,
        ks_distance=distance,
    )


def spectral_histogram(
    eigenvalues: Sequence[float], bins: int = 40, bounds: tuple[float, float] | None = None
) -> tuple[list[float], list[int]]:
    values = np.asarray(eigenvalues, dtype=np.float64)
    if bounds is None:
        low = min(-2.0, float(values.min())) if values.size else -2.0
        high = max(2.0, float(values.max())) if values.size else 2.0
        bounds = (low, high)
    counts, edges = np.histogram(values, bins=bins, range=bounds)
    return edges.tolist(), counts.tolist()
