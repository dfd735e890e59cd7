import logging
from collections import Counter
from collections.abc import Mapping
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType

import networkx as nx
import numpy as np
import scipy.sparse as sp
from pydantic import BaseModel

from rauzy_lab.exceptions import ConfigurationError, ConsistencyError
from rauzy_lab.language import LanguageSlice
from rauzy_lab.wordgen import Alphabet

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Arc:
    tail: int
    head: int
    label: str


@dataclass(frozen=True)
class RauzyDigraph:
    n: int
    vertices: tuple[str, ...]
    arcs: tuple[Arc, ...]
    alphabet: Alphabet
    labelled: bool = True

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    def arc_word(self, arc: Arc) -> str:
        return self.vertices[arc.tail] + arc.label

    @cached_property
    def arc_index(self) -> Mapping[str, Arc]:
        return MappingProxyType({self.arc_word(arc): arc for arc in self.arcs})

    def out_degrees(self) -> np.ndarray:
        return np.bincount([arc.tail for arc in self.arcs], minlength=self.vertex_count)

    def in_degrees(self) -> np.ndarray:
        return np.bincount([arc.head for arc in self.arcs], minlength=self.vertex_count)

    @cached_property
    def graph(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        graph.add_nodes_from(range(self.vertex_count))
        for arc in self.arcs:
            graph.add_edge(arc.tail, arc.head, label=arc.label if self.labelled else "")
        return graph

    @cached_property
    def undirected(self) -> nx.Graph:
        return self.graph.to_undirected()


def build_digraph(lower: LanguageSlice, upper: LanguageSlice, labelled: bool = True) -> RauzyDigraph:
    if upper.n != lower.n + 1:
        raise ConfigurationError(f"Slices must be consecutive, got n={lower.n} and n={upper.n}")
    arcs = []
    for word in upper:
        try:
            tail, head = lower.index(word[:-1]), lower.index(word[1:])
        except KeyError:
            raise ConsistencyError(
                f"L_{upper.n} word has a factor missing from L_{lower.n}", witness=word
            ) from None
        arcs.append(Arc(tail, head, word[-1]))
    return RauzyDigraph(lower.n, lower.factors, tuple(arcs), lower.alphabet, labelled)


@dataclass(frozen=True)
class Multigraph:
    """Undirected multigraph; edges map (v, w) with v < w to multiplicity, loops map v to loop count."""

    vertex_count: int
    edges: Mapping[tuple[int, int], int]
    loops: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "edges", MappingProxyType(dict(sorted(self.edges.items()))))
        object.__setattr__(self, "loops", MappingProxyType(dict(sorted(self.loops.items()))))

    @property
    def edge_count(self) -> int:
        return sum(self.edges.values()) + sum(self.loops.values())

    @property
    def loop_count(self) -> int:
        return sum(self.loops.values())

    @property
    def double_edge_count(self) -> int:
        return sum(1 for multiplicity in self.edges.values() if multiplicity >= 2)

    def degrees(self) -> np.ndarray:
        """Degrees with every loop counted once."""
        degrees = np.zeros(self.vertex_count, dtype=np.int64)
        for (v, w), multiplicity in self.edges.items():
            degrees[v] += multiplicity
            degrees[w] += multiplicity
        for v, count in self.loops.items():
            degrees[v] += count
        return degrees

    def adjacency(self) -> sp.csr_array:
        """Symmetric integer adjacency; a loop contributes 1 to the diagonal."""
        rows, cols, data = [], [], []
        for (v, w), multiplicity in self.edges.items():
            rows += [v, w]
            cols += [w, v]
            data += [multiplicity, multiplicity]
        for v, count in self.loops.items():
            rows.append(v)
            cols.append(v)
            data.append(count)
        shape = (self.vertex_count, self.vertex_count)
        return sp.csr_array((np.asarray(data, dtype=np.int64), (rows, cols)), shape=shape)

    @cached_property
    def graph(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.vertex_count))
        for (v, w), multiplicity in self.edges.items():
            graph.add_edge(v, w, multiplicity=multiplicity)
        for v, count in self.loops.items():
            graph.add_edge(v, v, multiplicity=count)
        return graph

    def check_bounds(self, k: int) -> list[str]:
        problems = []
        if self.loop_count > k:
            problems.append(f"{self.loop_count} loops exceed k={k}")
        if self.double_edge_count > k * k:
            problems.append(f"{self.double_edge_count} double edges exceed k^2={k * k}")
        if any(multiplicity > 2 for multiplicity in self.edges.values()):
            problems.append("an edge has multiplicity above 2")
        return problems


def underlying_graph(digraph: RauzyDigraph) -> Multigraph:
    edges: Counter[tuple[int, int]] = Counter()
    loops: Counter[int] = Counter()
    for arc in digraph.arcs:
        if arc.tail == arc.head:
            loops[arc.tail] += 1
        else:
            edges[min(arc.tail, arc.head), max(arc.tail, arc.head)] += 1
    return Multigraph(digraph.vertex_count, dict(edges), dict(loops))


class LineGraphVerdict(BaseModel):
    n: int
    passed: bool
    reason: str = ""
    witness: str | None = None


def line_graph_check(lower: RauzyDigraph, upper: RauzyDigraph) -> LineGraphVerdict:
    if upper.n != lower.n + 1:
        raise ConfigurationError(f"Digraphs must be consecutive, got n={lower.n} and n={upper.n}")

    arc_words = set(lower.arc_index)
    vertices = set(upper.vertices)
    mismatch = sorted(vertices ^ arc_words)
    if mismatch:
        word = mismatch[0]
        reason = "vertex of R(n+1) is not an arc of R(n)" if word in vertices else "arc of R(n) is not a vertex"
        return LineGraphVerdict(n=lower.n, passed=False, reason=reason, witness=word)

    for arc in upper.arcs:
        first = lower.arc_index[upper.vertices[arc.tail]]
        second = lower.arc_index[upper.vertices[arc.head]]
        if first.head != second.tail:
            return LineGraphVerdict(
                n=lower.n,
                passed=False,
                reason="arc of R(n+1) joins non-consecutive arcs of R(n)",
                witness=upper.arc_word(arc),
            )
    return LineGraphVerdict(n=lower.n, passed=True)
