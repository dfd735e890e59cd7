import logging
from collections import Counter
from dataclasses import dataclass
from functools import cached_property, lru_cache

import networkx as nx
from pydantic import BaseModel, Field

from rauzy_lab.canonical import RootedStructure, canonical_code, directed_path, undirected_path
from rauzy_lab.exceptions import ConfigurationError
from rauzy_lab.rauzy import Multigraph, RauzyDigraph

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RootedBall:
    root: int
    radius: int
    vertices: tuple[int, ...]
    structure: RootedStructure

    @cached_property
    def code(self) -> str:
        return canonical_code(self.structure)

    @property
    def size(self) -> int:
        return len(self.vertices)


class BallCensus(BaseModel):
    """Isomorphism classes of the radius r balls around every vertex, with their frequencies."""

    radius: int = Field(description="Ball radius r")
    labelled: bool = Field(description="Arc labels participate in ball codes")
    directed: bool = Field(description="Balls keep arc directions")
    vertex_count: int = Field(description="p(n), the number of roots")
    counts: dict[str, int] = Field(description="Canonical ball code to number of roots realizing it")
    path_fraction: float = Field(description="Fraction of roots whose ball is a 2r-path centred at the root")
    cycle_vertex_count: int = Field(description="Vertices on components that are directed cycles")


class CycleCensus(BaseModel):
    """Connected components that are directed cycles, counted by length."""

    counts: dict[int, int] = Field(description="Cycle length r to number of components that are directed r-cycles")

    def violations(self, k: int, n: int) -> list[str]:
        return [
            f"c_{length}={count} exceeds k^{length}={k**length}"
            for length, count in self.counts.items()
            if length <= n and count > k**length
        ]

    @property
    def vertex_count(self) -> int:
        return sum(length * count for length, count in self.counts.items())


def _check_radius(radius: int) -> None:
    if radius < 1:
        raise ConfigurationError(f"Ball radius must be at least 1, got {radius}")


def _ball_vertices(graph: nx.Graph, root: int, radius: int) -> tuple[int, ...]:
    return tuple(sorted(nx.single_source_shortest_path_length(graph, root, cutoff=radius)))


def ball(digraph: RauzyDigraph, root: int, radius: int, labelled: bool = False) -> RootedBall:
    """Ball of the given radius around root, distances taken in the underlying undirected graph.

    The ball keeps the edge directions; labelled balls also keep the edge labels.
    """
    _check_radius(radius)
    vertices = _ball_vertices(digraph.undirected, root, radius)
    local = {v: i for i, v in enumerate(vertices)}
    arcs = [
        (local[tail], local[head], data["label"] if labelled else "")
        for tail, head, data in digraph.graph.subgraph(vertices).edges(data=True)
    ]
    return RootedBall(root, radius, vertices, RootedStructure.from_arcs(len(vertices), local[root], arcs))


def undirected_ball(multigraph: Multigraph, root: int, radius: int) -> RootedBall:
    """Ball around root in the undirected multigraph, loops and parallel edges included."""
    _check_radius(radius)
    vertices = _ball_vertices(multigraph.graph, root, radius)
    local = {v: i for i, v in enumerate(vertices)}
    subgraph = multigraph.graph.subgraph(vertices)
    edges = [(local[v], local[w], data["multiplicity"]) for v, w, data in subgraph.edges(data=True)]
    return RootedBall(root, radius, vertices, RootedStructure.from_edges(len(vertices), local[root], edges))


@lru_cache(maxsize=64)
def directed_path_code(radius: int) -> str:
    return canonical_code(directed_path(radius))


@lru_cache(maxsize=64)
def undirected_path_code(radius: int) -> str:
    return canonical_code(undirected_path(radius))


def _is_path_candidate(item: RootedBall, edge_count: int) -> bool:
    # a centred 2r-path has exactly 2r+1 vertices and 2r edges
    return item.size == 2 * item.radius + 1 and edge_count == 2 * item.radius


def _directed_path_at(digraph: RauzyDigraph, root: int, radius: int) -> bool:
    item = ball(digraph, root, radius)
    edges = sum(1 for _ in digraph.graph.subgraph(item.vertices).edges())
    return _is_path_candidate(item, edges) and item.code == directed_path_code(radius)


def _undirected_path_at(multigraph: Multigraph, root: int, radius: int) -> bool:
    item = undirected_ball(multigraph, root, radius)
    edges = sum(data["multiplicity"] for _, _, data in multigraph.graph.subgraph(item.vertices).edges(data=True))
    return _is_path_candidate(item, edges) and item.code == undirected_path_code(radius)


def path_fraction(digraph: RauzyDigraph, radius: int) -> float:
    """Fraction of vertices whose ball is a directed path of length 2r centred on the vertex."""
    _check_radius(radius)
    if not digraph.vertex_count:
        return 0.0
    hits = sum(_directed_path_at(digraph, root, radius) for root in range(digraph.vertex_count))
    return hits / digraph.vertex_count


def line_fraction_undirected(multigraph: Multigraph, radius: int) -> float:
    """Same as path_fraction on the undirected multigraph."""
    _check_radius(radius)
    if not multigraph.vertex_count:
        return 0.0
    hits = sum(_undirected_path_at(multigraph, root, radius) for root in range(multigraph.vertex_count))
    return hits / multigraph.vertex_count


def cycle_components(digraph: RauzyDigraph) -> CycleCensus:
    """Weak components where every vertex has in and out degree one."""
    graph = digraph.graph
    counts: Counter[int] = Counter()
    for component in nx.weakly_connected_components(graph):
        if all(graph.in_degree(v) == 1 and graph.out_degree(v) == 1 for v in component):
            counts[len(component)] += 1
    return CycleCensus(counts=dict(sorted(counts.items())))


def census(digraph: RauzyDigraph, radius: int, labelled: bool = False) -> BallCensus:
    """Frequencies of the ball classes of the digraph.

    Classes are keyed by canonical code, so two vertices share a class exactly
    when their rooted balls are isomorphic. The path class is reported apart.
    """
    _check_radius(radius)
    if labelled and not digraph.labelled:
        raise ConfigurationError("Labelled census needs a labelled digraph")
    reference = directed_path_code(radius)
    counts: Counter[str] = Counter()
    paths = 0
    for root in range(digraph.vertex_count):
        item = ball(digraph, root, radius, labelled=labelled)
        code = item.code
        counts[code] += 1
        if item.size == 2 * radius + 1:
            plain = ball(digraph, root, radius).code if labelled else code
            paths += plain == reference
    log.debug("Census n=%d r=%d: %d ball types", digraph.n, radius, len(counts))
    return BallCensus(
        radius=radius,
        labelled=labelled,
        directed=True,
        vertex_count=digraph.vertex_count,
        counts=dict(sorted(counts.items())),
        path_fraction=paths / digraph.vertex_count if digraph.vertex_count else 0.0,
        cycle_vertex_count=cycle_components(digraph).vertex_count,
    )


def undirected_census(multigraph: Multigraph, radius: int, cycles: CycleCensus | None = None) -> BallCensus:
    _check_radius(radius)
    reference = undirected_path_code(radius)
    counts: Counter[str] = Counter()
    paths = 0
    for root in range(multigraph.vertex_count):
        item = undirected_ball(multigraph, root, radius)
        code = item.code
        counts[code] += 1
        paths += code == reference
    return BallCensus(
        radius=radius,
        labelled=False,
        directed=False,
        vertex_count=multigraph.vertex_count,
        counts=dict(sorted(counts.items())),
        path_fraction=paths / multigraph.vertex_count if multigraph.vertex_count else 0.0,
        cycle_vertex_count=cycles.vertex_count if cycles is not None else 0,
    )
