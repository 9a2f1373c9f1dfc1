"""Edge-list parsing, serialization, couplings, builtins."""

import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multicent import (
    AdjacencyTensor,
    DomainError,
    ParseError,
    add_interlayer_coupling,
    builtin_example1,
    format_edge_list,
    get_builtin,
    parse_edge_list,
    random_network,
    write_edge_list,
)


class TestParsing:
    def test_undirected_symmetrization(self):
        text = "mlnet 2 2 undirected unweighted\n1 1 2 2\n"
        a = parse_edge_list(text)
        assert a.entry((1, 1), (2, 2)) == 1.0
        assert a.entry((2, 2), (1, 1)) == 1.0
        assert a.nnz == 2
        assert a.is_symmetric

    def test_empty_edge_section(self):
        a = parse_edge_list("mlnet 3 2 undirected unweighted\n")
        assert a.nnz == 0
        assert a.is_symmetric

    def test_comments_and_blank_lines(self):
        text = "# a network\n\nmlnet 2 1 directed weighted\n# edge below\n1 1 2 1 0.5\n\n"
        a = parse_edge_list(text)
        assert a.entry((1, 1), (2, 1)) == 0.5
        assert a.entry((2, 1), (1, 1)) == 0.0
        assert not a.is_symmetric

    def test_weight_default_one(self):
        a = parse_edge_list("mlnet 2 1 directed weighted\n1 1 2 1\n")
        assert a.entry((1, 1), (2, 1)) == 1.0

    def test_duplicates_summed(self):
        text = "mlnet 2 1 directed weighted\n1 1 2 1 1.0\n1 1 2 1 2.0\n"
        assert parse_edge_list(text).entry((1, 1), (2, 1)) == 3.0

    def test_duplicates_strict(self):
        text = "mlnet 2 1 directed weighted\n1 1 2 1 1.0\n1 1 2 1 2.0\n"
        with pytest.raises(ParseError, match="line 3"):
            parse_edge_list(text, strict=True)

    def test_malformed_line_number(self):
        text = "mlnet 2 1 directed weighted\n1 1 2 1 1.0\n1 1 nonsense\n"
        with pytest.raises(ParseError, match="line 3"):
            parse_edge_list(text)

    def test_out_of_bounds_index(self):
        with pytest.raises(DomainError, match=r"\(3,1\)"):
            parse_edge_list("mlnet 2 1 directed weighted\n1 1 3 1 1.0\n")

    def test_missing_header(self):
        with pytest.raises(ParseError, match="header"):
            parse_edge_list("1 1 2 1 1.0\n# not a header\n")

    def test_weight_on_unweighted_strict(self):
        text = "mlnet 2 1 undirected unweighted\n1 1 2 1 2.0\n"
        with pytest.raises(ParseError, match="forbidden"):
            parse_edge_list(text, strict=True)
        # lax mode tolerates the column; the edge weight stays one
        assert parse_edge_list(text).entry((1, 1), (2, 1)) == 1.0

    def test_negative_weight_rejected(self):
        with pytest.raises(DomainError, match="positive"):
            parse_edge_list("mlnet 2 1 directed weighted\n1 1 2 1 -1.0\n")

    def test_zero_weight_dropped(self):
        a = parse_edge_list("mlnet 2 1 directed weighted\n1 1 2 1 0.0\n")
        assert a.nnz == 0

    def test_self_loop_stored_once_in_undirected(self):
        a = parse_edge_list("mlnet 2 1 undirected weighted\n1 1 1 1 2.0\n")
        assert a.entry((1, 1), (1, 1)) == 2.0
        assert a.nnz == 1

    def test_couple_directive(self):
        a = parse_edge_list("mlnet 2 2 undirected unweighted\ncouple 0.5\n")
        assert a.nnz == 4  # 2 nodes x 2 ordered layer pairs
        assert a.entry((1, 1), (1, 2)) == 0.5

    def test_couple_repeated_strict(self):
        text = "mlnet 2 2 undirected unweighted\ncouple 0.5\ncouple 0.5\n"
        with pytest.raises(ParseError, match="repeated"):
            parse_edge_list(text, strict=True)
        assert parse_edge_list(text).entry((1, 1), (1, 2)) == 1.0

    def test_stream_input(self):
        stream = io.StringIO("mlnet 2 1 directed weighted\n1 1 2 1 1.5\n")
        assert parse_edge_list(stream).entry((1, 1), (2, 1)) == 1.5

    def test_missing_file(self, tmp_path):
        with pytest.raises(ParseError, match="no such file"):
            parse_edge_list(tmp_path / "absent.mlnet")


class TestRoundTrip:
    def test_example1(self):
        a = builtin_example1()
        assert parse_edge_list(format_edge_list(a)) == a

    def test_random_weighted_undirected(self):
        a = random_network(6, 3, 30, weighted=True, seed=1)
        assert parse_edge_list(format_edge_list(a)) == a

    def test_directed(self):
        a = AdjacencyTensor.from_edges(
            3, 2, [((1, 1), (2, 2), 0.123456789012345), ((2, 1), (1, 2), 2.0)]
        )
        text = format_edge_list(a)
        assert "directed" in text.splitlines()[0]
        assert parse_edge_list(text) == a

    def test_write_read_file(self, tmp_path):
        a = builtin_example1()
        path = tmp_path / "net.mlnet"
        write_edge_list(a, path)
        assert parse_edge_list(path) == a

    @given(seed=st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=25, deadline=None)
    def test_round_trip_property(self, seed):
        rng = np.random.default_rng(seed)
        n, l = int(rng.integers(2, 6)), int(rng.integers(1, 4))
        max_edges = n * l * (n * l - 1) // 2
        n_edges = int(rng.integers(1, max_edges + 1))
        a = random_network(n, l, n_edges, weighted=True, seed=seed)
        assert parse_edge_list(format_edge_list(a)) == a


class TestCoupling:
    def test_single_node_three_layers(self):
        a = add_interlayer_coupling(AdjacencyTensor.zeros(1, 3), 1.0)
        assert a.nnz == 6

    def test_single_layer_noop(self):
        base = builtin_example1()
        single = AdjacencyTensor.from_supra(np.eye(4), 4, 1)
        assert add_interlayer_coupling(single, 1.0) == single

    def test_large_count(self):
        a = add_interlayer_coupling(AdjacencyTensor.zeros(417, 37), 1.0)
        assert a.nnz == 417 * 37 * 36

    def test_adds_to_existing(self):
        a = parse_edge_list("mlnet 1 2 undirected weighted\n1 1 1 2 1.0\n")
        coupled = add_interlayer_coupling(a, 0.25)
        assert coupled.entry((1, 1), (1, 2)) == 1.25

    def test_bad_weight(self):
        with pytest.raises(DomainError):
            add_interlayer_coupling(AdjacencyTensor.zeros(2, 2), 0.0)


class TestBuiltin:
    def test_example1_shape(self):
        a = builtin_example1()
        assert (a.n_nodes, a.n_layers) == (5, 2)
        assert a.nnz == 22  # 11 undirected edges stored both ways
        assert a.is_symmetric

    def test_example1_degrees(self):
        a = builtin_example1()
        degrees = np.asarray(a.mat.sum(axis=1)).ravel()
        assert degrees[6] == 4.0  # (2,2)
        assert degrees[8] == 1.0  # (4,2)

    def test_example1_twin_neighborhoods(self):
        a = builtin_example1()
        dense = a.toarray()
        # (5,1) and (5,2) both connect exactly to {(3,1), (2,2)}
        np.testing.assert_array_equal(dense[4], dense[9])
        assert set(np.nonzero(dense[4])[0]) == {2, 6}

    def test_get_builtin(self):
        assert get_builtin("example1") == builtin_example1()
        with pytest.raises(DomainError, match="unknown builtin"):
            get_builtin("nope")


class TestRandomNetwork:
    def test_deterministic(self):
        assert random_network(5, 2, 10, seed=3) == random_network(5, 2, 10, seed=3)

    def test_edge_count_and_symmetry(self):
        a = random_network(20, 32, 674, weighted=True, seed=0)
        assert a.nnz == 2 * 674
        assert a.is_symmetric
        assert np.all(a.mat.data > 0)

    def test_bad_edge_count(self):
        with pytest.raises(DomainError):
            random_network(2, 1, 5, seed=0)
