"""Tests for rauzy_lab.rauzy module."""

import numpy as np
import pytest

from rauzy_lab.exceptions import ConfigurationError, ConsistencyError
from rauzy_lab.language import LanguageSlice, extension_counts, prolongation_census
from rauzy_lab.rauzy import Multigraph, RauzyDigraph, build_digraph, line_graph_check, underlying_graph
from rauzy_lab.wordgen import Alphabet
from tests.conftest import (
    make_digraph,
    make_full_shift_slices,
    make_periodic_slices,
    make_prefix,
    make_slices,
    make_sturmian_slices,
)

GENERATORS = ["sturmian:golden", "substitution:0>01,1>0", "substitution:0>01,1>10", "ck:desk"]


class TestBuildDigraph:
    def test_arcs_follow_words(self) -> None:
        slices = make_full_shift_slices(2, 2, 3)
        digraph = make_digraph(slices, 2)
        assert digraph.vertices == ("00", "01", "10", "11")
        arc = digraph.arc_index["011"]
        assert (digraph.vertices[arc.tail], digraph.vertices[arc.head], arc.label) == ("01", "11", "1")
        assert digraph.out_degrees().tolist() == [2, 2, 2, 2]

    @pytest.mark.parametrize("source", GENERATORS)
    def test_arc_count_is_next_complexity(self, source: str) -> None:
        slices = make_slices(make_prefix(source, 20_000), *range(1, 102))
        for n in (1, 10, 50, 100):
            digraph = make_digraph(slices, n)
            assert len(digraph.arcs) == slices[n + 1].p
            assert int(digraph.in_degrees().sum()) == slices[n + 1].p

    @pytest.mark.parametrize("source", GENERATORS)
    def test_inequality_suite(self, source: str) -> None:
        slices = make_slices(make_prefix(source, 40_000), *range(1, 202))
        for n in range(1, 201):
            assert prolongation_census(slices[n], slices[n + 1]).violations() == []

    @pytest.mark.parametrize("source", [*GENERATORS, "full-shift"])
    def test_degrees_are_extension_counts(self, source: str) -> None:
        if source == "full-shift":
            slices = make_full_shift_slices(2, 6, 7)
        else:
            slices = make_slices(make_prefix(source, 20_000), 6, 7, 80, 81)
        for n in sorted(slices)[::2]:
            digraph = make_digraph(slices, n)
            left, right = extension_counts(slices[n], slices[n + 1])
            assert digraph.out_degrees().tolist() == [right[word] for word in digraph.vertices]
            assert digraph.in_degrees().tolist() == [left[word] for word in digraph.vertices]

    @pytest.mark.parametrize("source", GENERATORS)
    def test_every_label_is_the_last_letter_of_the_head(self, source: str) -> None:
        digraph = make_digraph(make_slices(make_prefix(source, 20_000), 40, 41), 40)
        assert all(arc.label == digraph.vertices[arc.head][-1] for arc in digraph.arcs)
        assert all(digraph.arc_word(arc)[1:] == digraph.vertices[arc.head] for arc in digraph.arcs)

    def test_missing_factor(self) -> None:
        lower = LanguageSlice(1, ("0",), Alphabet.binary())
        upper = LanguageSlice(2, ("00", "01"), Alphabet.binary())
        with pytest.raises(ConsistencyError) as exc_info:
            build_digraph(lower, upper)
        assert exc_info.value.witness == "01"

    def test_unlabelled_graph_hides_labels(self) -> None:
        digraph = make_digraph(make_full_shift_slices(2, 2, 3), 2, labelled=False)
        assert {data["label"] for _, _, data in digraph.graph.edges(data=True)} == {""}


class TestLineGraph:
    @pytest.mark.parametrize("source", GENERATORS)
    def test_successive_graphs(self, source: str) -> None:
        slices = make_slices(make_prefix(source, 20_000), *range(1, 103))
        for n in (1, 5, 20, 100):
            verdict = line_graph_check(make_digraph(slices, n), make_digraph(slices, n + 1))
            assert verdict.passed, verdict.reason

    def test_full_shift(self) -> None:
        slices = make_full_shift_slices(2, 3, 4, 5)
        assert line_graph_check(make_digraph(slices, 3), make_digraph(slices, 4)).passed

    def test_unrelated_graphs(self) -> None:
        full = make_full_shift_slices(2, 2, 3)
        alphabet = Alphabet.binary()
        golden_mean = {
            n: LanguageSlice(n, tuple(word for word in make_full_shift_slices(2, n)[n] if "11" not in word), alphabet)
            for n in (3, 4)
        }
        verdict = line_graph_check(make_digraph(full, 2), make_digraph(golden_mean, 3))
        assert not verdict.passed
        assert verdict.witness == "011"
        assert verdict.reason == "arc of R(n) is not a vertex"

    def test_non_consecutive(self) -> None:
        slices = make_full_shift_slices(2, 2, 3, 4, 5)
        with pytest.raises(ConfigurationError):
            line_graph_check(make_digraph(slices, 2), make_digraph(slices, 4))


class TestMultigraph:
    def test_full_shift(self, full_shift_10: RauzyDigraph) -> None:
        graph = underlying_graph(full_shift_10)
        assert graph.vertex_count == 1024
        assert graph.loop_count == 2
        assert graph.double_edge_count == 1
        assert graph.edge_count == 2048
        assert int(graph.degrees().sum()) == 2 * 2046 + 2
        assert graph.check_bounds(2) == []

    def test_periodic_double_edge(self) -> None:
        graph = underlying_graph(make_digraph(make_periodic_slices("01", 2, 3), 2))
        assert dict(graph.edges) == {(0, 1): 2}
        assert graph.adjacency().toarray().tolist() == [[0, 2], [2, 0]]

    def test_loops_sit_on_the_diagonal(self) -> None:
        graph = Multigraph(2, {(0, 1): 1}, {0: 1})
        assert np.array_equal(graph.adjacency().toarray(), np.array([[1, 1], [1, 0]]))
        assert graph.degrees().tolist() == [2, 1]

    def test_bounds_report_violations(self) -> None:
        graph = Multigraph(3, {(0, 1): 3}, {0: 1, 1: 1, 2: 1})
        problems = graph.check_bounds(2)
        assert len(problems) == 2

    def test_sturmian_is_simple(self, sturmian_200: RauzyDigraph) -> None:
        graph = underlying_graph(sturmian_200)
        assert graph.loop_count == 0
        assert graph.edge_count == 202
        assert set(graph.edges.values()) == {1}


def test_small_sturmian_graph() -> None:
    slices = make_sturmian_slices(5, 6)
    assert make_digraph(slices, 5).vertex_count == 6
