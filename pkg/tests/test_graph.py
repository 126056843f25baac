import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chisquare

from frogwild.graph import (DirectedGraph, EdgeListError, advance, apply_P, load_edge_list,
                            sample_step, step_distribution, write_edge_list)


def write(tmp_path, text, name="g.txt"):
    path = tmp_path / name
    path.write_text(text)
    return path


def star():
    return DirectedGraph.from_edges([0, 0], [1, 2], 3)


class TestLoadEdgeList:
    def test_two_cycle(self, tmp_path):
        g = load_edge_list(write(tmp_path, "0 1\n1 0\n"))
        assert (g.n, g.n_edges) == (2, 2)
        assert g.dangling.size == 0

    def test_duplicates_collapse(self, tmp_path):
        g = load_edge_list(write(tmp_path, "0 1\n0 1\n1 0\n"))
        assert g.n_edges == 2
        assert g.duplicates_collapsed == 1

    def test_densification(self, tmp_path):
        g = load_edge_list(write(tmp_path, "5 9\n9 5\n"))
        assert g.n == 2
        assert g.labels.tolist() == [5, 9]
        assert g.out_edges(0).tolist() == [1]
        assert g.out_edges(1).tolist() == [0]

    def test_self_loop_kept(self, tmp_path):
        g = load_edge_list(write(tmp_path, "3 3\n"))
        assert (g.n, g.n_edges) == (1, 1)
        assert g.out_edges(0).tolist() == [0]

    def test_comments_and_blank_lines(self, tmp_path):
        text = "# FromNodeId ToNodeId\n\n0 1\n# more\n1 2\n"
        g = load_edge_list(write(tmp_path, text), "snap-with-comments")
        assert g.n_edges == 2
        assert g.dangling.tolist() == [2]

    def test_comment_rejected_in_plain_mode(self, tmp_path):
        with pytest.raises(EdgeListError) as info:
            load_edge_list(write(tmp_path, "0 1\n# no\n"), "plain-pairs")
        assert info.value.line == 2

    @pytest.mark.parametrize("bad, line", [
        ("0 1\n1\n", 2),
        ("0 1\n1 2 3\n", 2),
        ("a b\n", 1),
        ("0 1\n-1 0\n", 2),
        ("0 1\n1 0\n0 99999999999999999999\n", 3),
    ])
    def test_malformed_lines_report_line_number(self, tmp_path, bad, line):
        with pytest.raises(EdgeListError) as info:
            load_edge_list(write(tmp_path, bad))
        assert info.value.line == line
        assert f"line {line}" in str(info.value)

    def test_empty_graph(self, tmp_path):
        with pytest.raises(EdgeListError):
            load_edge_list(write(tmp_path, "# nothing here\n"))

    def test_unknown_format(self, tmp_path):
        with pytest.raises(ValueError):
            load_edge_list(write(tmp_path, "0 1\n"), "csv")

    def test_round_trip(self, tmp_path, suite_graphs):
        g = suite_graphs["pa-200"]
        path = tmp_path / "pa.txt"
        write_edge_list(g, path)
        h = load_edge_list(path, "plain-pairs")
        assert np.array_equal(g.indptr, h.indptr)
        assert np.array_equal(g.indices, h.indices)


class TestGraph:
    def test_immutable(self):
        g = star()
        with pytest.raises(ValueError):
            g.indices[0] = 2

    def test_degrees(self):
        g = DirectedGraph.from_edges([0, 0, 1, 2], [1, 2, 2, 0], 4)
        assert g.out_degree.tolist() == [2, 1, 1, 0]
        assert g.in_degree.tolist() == [1, 1, 2, 0]
        assert g.dangling.tolist() == [3]

    def test_endpoint_out_of_range(self):
        with pytest.raises(ValueError):
            DirectedGraph.from_edges([0], [3], 2)

    def test_transition_matrix_orientation(self):
        P = star().transition_matrix().toarray()
        # column j is the step distribution from j
        assert P[:, 0].tolist() == [0.0, 0.5, 0.5]

    def test_apply_P_spreads_dangling_mass(self):
        g = DirectedGraph.from_edges([0], [1], 2)
        assert np.allclose(apply_P(g, np.array([0.0, 1.0])), [0.5, 0.5])


class TestStepDistribution:
    def test_two_cycle(self, suite_graphs):
        assert step_distribution(suite_graphs["two-cycle"], 0).tolist() == [0.0, 1.0]

    def test_star(self):
        assert step_distribution(star(), 0).tolist() == [0.0, 0.5, 0.5]

    def test_dangling_is_uniform(self):
        g = DirectedGraph.from_edges([0], [1], 2)
        assert step_distribution(g, 1).tolist() == [0.5, 0.5]

    @pytest.mark.parametrize("j", [-1, 3])
    def test_out_of_range(self, j):
        with pytest.raises(IndexError):
            step_distribution(star(), j)

    def test_normalized_and_supported(self, suite_graphs):
        for g in suite_graphs.values():
            for j in range(g.n):
                p = step_distribution(g, j)
                assert abs(p.sum() - 1.0) <= 1e-12
                if g.out_degree[j]:
                    assert np.array_equal(np.flatnonzero(p), g.out_edges(j))


class TestSampleStep:
    def test_deterministic_successor(self, suite_graphs, rng):
        assert all(sample_step(suite_graphs["two-cycle"], 0, rng) == 1 for _ in range(20))

    def test_star_frequencies(self, rng):
        draws = np.array([sample_step(star(), 0, rng) for _ in range(20_000)])
        draws = np.concatenate([draws, advance(star(), np.zeros(80_000, dtype=np.int64), rng)])
        freq = np.bincount(draws, minlength=3) / draws.size
        # binomial 3-sigma at 1e5 draws is 0.0047
        assert freq[0] == 0
        assert abs(freq[1] - 0.5) <= 0.01 and abs(freq[2] - 0.5) <= 0.01

    def test_dangling_frequencies(self, rng):
        g = DirectedGraph.from_edges([0], [1], 2)
        freq = np.bincount(advance(g, np.ones(100_000, dtype=np.int64), rng), minlength=2) / 1e5
        assert np.all(np.abs(freq - 0.5) <= 0.01)

    def test_goodness_of_fit(self, suite_graphs, rng):
        g = suite_graphs["pa-200"]
        for j in (0, 57, 199):
            sample = advance(g, np.full(100_000, j), rng)
            succ = g.out_edges(j)
            observed = np.bincount(sample, minlength=g.n)[succ]
            assert observed.sum() == sample.size
            assert chisquare(observed).pvalue >= 0.001


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 30), st.integers(0, 30)), min_size=1, max_size=120))
def test_from_edges_invariants(pairs):
    src, dst = map(np.array, zip(*pairs))
    g = DirectedGraph.from_edges(src, dst)
    distinct = {(a, b) for a, b in pairs}
    assert g.n == len(set(src.tolist()) | set(dst.tolist()))
    assert g.n_edges == len(distinct)
    assert g.duplicates_collapsed == len(pairs) - len(distinct)
    assert g.out_degree.sum() == g.n_edges == g.in_degree.sum()
    relabelled = {(int(g.labels[a]), int(g.labels[b])) for a, b in zip(*g.edges())}
    assert relabelled == distinct
