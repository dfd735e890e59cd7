"""Exact canonical codes of small rooted graphs.

Colour refinement is followed by individualisation of the first non-singleton cell.
Every discrete colouring yields a certificate, and the smallest certificate is the code.
Leaves with equal certificates give automorphisms, which prune sibling branches.
"""

from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass

# (neighbour, tag) pairs; tags are short strings so certificates compare totally
Adjacency = tuple[tuple[tuple[int, str], ...], ...]


@dataclass(frozen=True)
class RootedStructure:
    root: int
    adjacency: Adjacency

    @property
    def size(self) -> int:
        return len(self.adjacency)

    @classmethod
    def from_arcs(cls, size: int, root: int, arcs: Sequence[tuple[int, int, str]]) -> "RootedStructure":
        """Directed arcs (tail, head, label); an empty label makes the structure unlabelled."""
        adjacency: list[list[tuple[int, str]]] = [[] for _ in range(size)]
        for tail, head, label in arcs:
            if tail == head:
                adjacency[tail].append((tail, f"l{label}"))
            else:
                adjacency[tail].append((head, f"o{label}"))
                adjacency[head].append((tail, f"i{label}"))
        return cls(root, tuple(tuple(sorted(items)) for items in adjacency))

    @classmethod
    def from_edges(cls, size: int, root: int, edges: Sequence[tuple[int, int, int]]) -> "RootedStructure":
        """Undirected edges (v, w, multiplicity); v == w is a loop of that count."""
        adjacency: list[list[tuple[int, str]]] = [[] for _ in range(size)]
        for v, w, multiplicity in edges:
            if v == w:
                adjacency[v].append((v, f"l{multiplicity}"))
            else:
                adjacency[v].append((w, f"e{multiplicity}"))
                adjacency[w].append((v, f"e{multiplicity}"))
        return cls(root, tuple(tuple(sorted(items)) for items in adjacency))


Certificate = tuple[tuple[int, int, str], ...]


def _refine(adjacency: Adjacency, colours: list[int]) -> list[int]:
    cells = len(set(colours))
    while True:
        signatures = [
            (colours[v], tuple(sorted((colours[w], tag) for w, tag in adjacency[v]))) for v in range(len(adjacency))
        ]
        ranking = {signature: i for i, signature in enumerate(sorted(set(signatures)))}
        colours = [ranking[signature] for signature in signatures]
        if len(ranking) == cells:
            return colours
        cells = len(ranking)


def _individualise(colours: list[int], vertex: int) -> list[int]:
    keys = [(colour, 0 if v == vertex else 1) for v, colour in enumerate(colours)]
    ranking = {key: i for i, key in enumerate(sorted(set(keys)))}
    return [ranking[key] for key in keys]


def _certificate(adjacency: Adjacency, colours: list[int]) -> Certificate:
    return tuple(sorted((colours[v], colours[w], tag) for v in range(len(adjacency)) for w, tag in adjacency[v]))


class _Search:
    def __init__(self, structure: RootedStructure) -> None:
        self.adjacency = structure.adjacency
        self.root = structure.root
        self.best: Certificate | None = None
        self.best_colours: list[int] = []
        self.first: Certificate | None = None
        self.first_colours: list[int] = []
        self.automorphisms: list[list[int]] = []

    def run(self) -> Certificate:
        size = len(self.adjacency)
        colours = _refine(self.adjacency, [0 if v == self.root else 1 for v in range(size)])
        self._descend(colours, [])
        assert self.best is not None
        return self.best

    def _leaf(self, colours: list[int]) -> None:
        certificate = _certificate(self.adjacency, colours)
        if self.first is None:
            self.first, self.first_colours = certificate, colours
        elif certificate == self.first:
            self._record(self.first_colours, colours)

        if self.best is None or certificate < self.best:
            self.best, self.best_colours = certificate, colours
        elif certificate == self.best and self.best_colours is not self.first_colours:
            self._record(self.best_colours, colours)

    def _record(self, reference: list[int], colours: list[int]) -> None:
        by_colour = {colour: v for v, colour in enumerate(colours)}
        mapping = [by_colour[colour] for colour in reference]
        if any(v != w for v, w in enumerate(mapping)):
            self.automorphisms.append(mapping)

    def _orbit_roots(self, path: list[int]) -> list[int]:
        parent = list(range(len(self.adjacency)))

        def find(v: int) -> int:
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        for mapping in self.automorphisms:
            if any(mapping[v] != v for v in path):
                continue
            for v, w in enumerate(mapping):
                a, b = find(v), find(w)
                if a != b:
                    parent[max(a, b)] = min(a, b)
        return [find(v) for v in range(len(self.adjacency))]

    def _descend(self, colours: list[int], path: list[int]) -> None:
        counts = Counter(colours)
        if len(counts) == len(colours):
            self._leaf(colours)
            return

        target = min(colour for colour, count in counts.items() if count > 1)
        explored: list[int] = []
        for vertex in (v for v, colour in enumerate(colours) if colour == target):
            if explored:
                orbits = self._orbit_roots(path)
                if any(orbits[vertex] == orbits[seen] for seen in explored):
                    continue
            explored.append(vertex)
            self._descend(_refine(self.adjacency, _individualise(colours, vertex)), [*path, vertex])


def canonical_certificate(structure: RootedStructure) -> Certificate:
    return _Search(structure).run()


def canonical_code(structure: RootedStructure) -> str:
    """Text form of the canonical certificate; equal codes mean rooted-isomorphic structures."""
    certificate = canonical_certificate(structure)
    return f"{structure.size}|" + ";".join(f"{a}-{b}{tag}" for a, b, tag in certificate)


def directed_path(radius: int) -> RootedStructure:
    """Directed path on 2r+1 vertices rooted at its centre."""
    size = 2 * radius + 1
    return RootedStructure.from_arcs(size, radius, [(v, v + 1, "") for v in range(size - 1)])


def undirected_path(radius: int) -> RootedStructure:
    size = 2 * radius + 1
    return RootedStructure.from_edges(size, radius, [(v, v + 1, 1) for v in range(size - 1)])
