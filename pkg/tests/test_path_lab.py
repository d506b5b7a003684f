import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spectracl import path_lab as pl
from spectracl.degree_model import PartitionSpec, edge_probability
from spectracl.graph_gen import DirectedGraph
from spectracl.random_models import random_graph, random_sequence, random_spec
from spectracl.verify import run_suite


def test_decompose_interior_follows_definition():
    dec = pl.decompose_path((1, 2, 3, 4, 1, 2, 3, 7, 8))
    assert dec.blocks == ((4, 2),)
    assert dec.k == {2: 1} and dec.k0 == 6
    assert dec.interior == (2, 3, 4, 7)
    assert len(dec.interior) == 8 - 1 - 3
    assert dec.block_endpoints == ((1, 3),)


def test_decompose_simple_path():
    dec = pl.decompose_path((1, 2, 3))
    assert dec.blocks == () and dec.interior == (2,) and dec.k0 == 2


def test_decompose_back_and_forth():
    dec = pl.decompose_path((1, 2, 1, 2, 1))
    assert dec.edge_flags == (True, True, False, False)
    assert dec.blocks == ((2, 2),) and dec.k == {2: 1}
    assert dec.is_cycle and not dec.ends_new


def test_decompose_needs_an_edge():
    with pytest.raises(ValueError):
        pl.decompose_path((3,))


@pytest.fixture
def seq8(rng):
    return random_sequence(rng, 8)


def test_single_edge_probability(seq8):
    a, b, S = seq8.a, seq8.b, seq8.S
    assert pl.path_probability((1, 2), seq8) == pytest.approx(b[1] * a[2] / S, rel=1e-14)


def test_repeated_block_probability(seq8):
    a, b, S = seq8.a, seq8.b, seq8.S
    path = (1, 2, 3, 4, 2, 3, 7)
    expected = (b[1] * a[7] / S) * (a[2] * b[3] / S) * np.prod([a[i] * b[i] / S for i in (2, 3, 4)])
    assert pl.path_probability(path, seq8) == pytest.approx(expected, rel=1e-12)
    assert pl.path_probability_oracle(path, seq8) == pytest.approx(expected, rel=1e-12)


def test_open_path_with_repeated_last_edge_is_refused(seq8):
    with pytest.raises(pl.PreconditionError):
        pl.path_probability((1, 2, 1, 2), seq8)


def test_oracle_examples(seq8):
    p12, p21 = edge_probability(seq8, 1, 2), edge_probability(seq8, 2, 1)
    assert pl.path_probability_oracle((1, 2, 1, 2), seq8) == pytest.approx(p12 * p21)
    simple = (0, 3, 5, 6)
    direct = np.prod([edge_probability(seq8, u, v) for u, v in pl.path_edges(simple)])
    assert pl.path_probability_oracle(simple, seq8) == pytest.approx(direct)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.lists(st.integers(0, 5), min_size=2, max_size=10))
def test_formula_matches_oracle_on_domain(seed, path):
    seq = random_sequence(np.random.default_rng(seed), 6)
    dec = pl.decompose_path(path)
    if not (dec.is_cycle or dec.ends_new):
        return
    assert pl.path_probability(path, seq) == pytest.approx(pl.path_probability_oracle(path, seq), rel=1e-12, abs=1e-300)


def test_minimal_edge_list_examples():
    assert pl.minimal_edge_list((1, 2, 3, 1, 2, 4)) == [(1, 2), (2, 3), (3, 1), (2, 4)]
    assert pl.minimal_edge_list((1, 2, 3)) == [(1, 2), (2, 3)]
    assert pl.minimal_edge_list((1, 1, 1)) == [(1, 1)]


def test_cycle_inducing_examples():
    edges = [(1, 2), (2, 2), (2, 3), (3, 4), (4, 3), (3, 3)]
    assert pl.cycle_inducing_edges(edges) == [1, 4, 5]
    assert pl.cycle_inducing_edges([(1, 2), (2, 3), (1, 3)]) == []
    assert pl.cycle_inducing_edges([(1, 2), (2, 1)]) == [1]
    with pytest.raises(ValueError):
        pl.cycle_inducing_edges([(1, 2), (1, 2)])


def test_reduce_edge_list_examples():
    red = pl.reduce_edge_list((1, 2, 2, 3, 4, 3, 3), 2)
    assert red.edges == ((2, 2), (2, 3), (3, 4), (4, 3))
    assert red.cycle_inducing_positions == (0, 3)
    tri = pl.reduce_edge_list((5, 6, 7, 5), 1)
    assert tri.edges == ((5, 6), (6, 7), (7, 5))
    assert pl.reduce_edge_list((1, 2, 2, 3), 1).edges == ((2, 2),)
    with pytest.raises(pl.PreconditionError):
        pl.reduce_edge_list((1, 2, 3), 1)


def test_m_lists_examples(seq8):
    dec = pl.m_lists(pl.reduce_edge_list((1, 2, 2, 3, 4, 3, 3), 2), seq8)
    assert dec.lists == ((2, 2), (2, 3, 4, 3))
    assert dec.ok, dec.violations
    two = pl.m_lists(pl.reduce_edge_list((4, 6, 4), 1), seq8)
    assert two.lists == ((4, 6, 4),) and two.ok


def test_count_paths_examples():
    N = 6
    cycle = DirectedGraph.from_edges(N, [(i, (i + 1) % N) for i in range(N)])
    assert all(pl.count_paths_exact(cycle, r) == N for r in range(1, 9))
    full = DirectedGraph.from_dense(np.ones((10, 10), dtype=bool))
    # 10^31 overflows 64-bit integers
    assert pl.count_paths_exact(full, 30) == 10 ** 31
    assert pl.count_cycles_exact(full, 30) == 10 ** 30


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 2 ** 32 - 1))
def test_counts_match_dfs(N, r, seed):
    g = random_graph(np.random.default_rng(seed), N)
    assert pl.count_paths_exact(g, r) == pl.walks_by_dfs(g, r)
    assert pl.count_cycles_exact(g, r) == pl.walks_by_dfs(g, r, closed=True)


def test_cycle_count_examples(rng):
    g = DirectedGraph.from_edges(4, [(0, 0), (2, 2), (0, 1)])
    assert pl.count_cycles_exact(g, 1) == 2
    tri = DirectedGraph.from_edges(3, [(0, 1), (1, 2), (2, 0)])
    assert pl.count_cycles_exact(tri, 3) == 3
    assert pl.enumerate_simple_cycles(tri, 3) == 1
    assert pl.simple_cycle_count(tri, 3) == 3
    for _ in range(20):
        g = random_graph(rng, 7)
        for r in range(1, 8):
            sc = pl.simple_cycle_count(g, r)
            assert pl.count_cycles_exact(g, r) >= sc
            assert sc == r * pl.enumerate_simple_cycles(g, r) or r == 1


def test_enumeration_scale_limits():
    with pytest.raises(ValueError):
        pl.enumerate_simple_cycles(DirectedGraph.from_edges(21, []), 3)
    with pytest.raises(ValueError):
        pl.enumerate_simple_cycles(DirectedGraph.from_edges(5, []), 13)
    with pytest.raises(ValueError):
        pl.count_simple_paths_from(DirectedGraph.from_edges(21, []), 0, 2)


def test_simple_paths_on_path_graph():
    g = DirectedGraph.from_edges(6, [(i, i + 1) for i in range(5)])
    for y in range(6):
        for l in range(1, 6):
            assert pl.count_simple_paths_from(g, y, l) == (1 if y + l <= 5 else 0)


def test_cycle_block_decomposition_examples():
    dec = pl.cycle_block_decomposition((1, 2, 3))
    assert dec.prefix == (1, 2, 3) and dec.cycle is None and dec.suffix == ()
    dec = pl.cycle_block_decomposition((1, 2, 3, 2, 3, 4))
    assert dec.prefix == (1, 2) and dec.cycle == (2, 3, 2) and dec.repeats == 1
    assert dec.concat() == (1, 2, 3, 2, 3, 4)
    loop = pl.cycle_block_decomposition((0, 1, 0, 1, 0, 1, 0))
    assert loop.prefix == (0,) and loop.repeats == 3
    assert pl.cycle_block_decomposition((1, 1, 2, 2)) is None


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 15))
def test_cycle_block_round_trip(seed, r):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, int(rng.integers(2, 9)), density=0.3)
    walk = [int(rng.integers(g.N))]
    for _ in range(r):
        nbrs = g.out_neighbors(walk[-1])
        if nbrs.size == 0:
            break
        walk.append(int(nbrs[rng.integers(nbrs.size)]))
    if len(walk) < 2:
        return
    dec = pl.cycle_block_decomposition(walk)
    if dec is not None:
        assert dec.concat() == tuple(walk)


def test_partitioned_expectation_single_edge(rng):
    spec = random_spec(rng, 4, 2)
    for i in range(4):
        for j in range(4):
            assert pl.partitioned_expected_paths(spec, i, j, 1) == pytest.approx(edge_probability(spec, i, j))


def test_partitioned_expectation_single_group_matches_enumeration(rng):
    seq = random_sequence(rng, 3)
    spec = PartitionSpec.from_chung_lu(seq, np.ones(3, dtype=int), 1)
    for r in (2, 3, 4):
        oracle = pl.expected_walk_matrix_by_graphs(seq, r)
        for i in range(3):
            for j in range(3):
                assert pl.partitioned_expected_paths(spec, i, j, r) == pytest.approx(oracle[i, j], abs=1e-10)


def test_partitioned_expectation_two_groups_matches_enumeration(rng):
    spec = random_spec(rng, 4, 2, zero_prob=0.2)
    oracle = pl.expected_walk_matrix_by_graphs(spec, 3)
    for i in range(4):
        for j in range(4):
            assert abs(pl.partitioned_expected_paths(spec, i, j, 3) - oracle[i, j]) <= 1e-10


def test_partitioned_expectation_scale_refusal(rng):
    with pytest.raises(ValueError):
        pl.partitioned_expected_paths(random_spec(rng, 40, 2), 0, 1, 6)


def test_trace_cr_examples():
    spec = PartitionSpec.uniform_blocks([3, 3], np.full((2, 2), 1.0))
    acyclic = DirectedGraph.from_edges(6, [(0, 1), (1, 2), (3, 4)])
    assert pl.trace_cr(acyclic, spec, 3) == 0.0
    tri = DirectedGraph.from_edges(6, [(0, 1), (1, 2), (2, 0)])
    assert pl.trace_cr(tri, spec, 3) == pytest.approx(1.5)
    assert pl.trace_cr(tri, spec, 3) <= pl.count_cycles_exact(tri, 3)


@pytest.mark.parametrize("name", ["count_identity", "probability_oracle", "exact_counts", "short_cycle_cap",
                                  "m_list_identity", "node_matrix_sum"])
def test_invariant_suites(name):
    res = run_suite(f"path_lab.{name}")
    assert res.passed, res.detail
