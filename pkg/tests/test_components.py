import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from irgraph.components import UnionFind, analyze, component_of, union_find_roots
from irgraph.errors import IndexOutOfRange
from irgraph.model import LambdaOverN, ModelSpec, validate
from irgraph.rng import mix
from irgraph.sampler import Graph, sample_graph
from oracles import bfs_sizes


def graph(n, edges, counts=None):
    return Graph(np.array(counts or [n]), np.array(edges, dtype=np.int64).reshape(-1, 2))


def test_empty_graph():
    s = analyze(graph(5, []))
    assert s.sizes.tolist() == [1] * 5
    assert s.isolated_per_type.tolist() == [5] and not s.is_connected
    assert s.second_largest == 1


def test_path():
    s = analyze(graph(5, [[0, 1], [1, 2], [2, 3], [3, 4]]))
    assert s.sizes.tolist() == [5] and s.is_connected and s.isolated_total == 0
    assert s.second_largest == 0


def test_two_triangles_and_isolated():
    s = analyze(graph(7, [[0, 1], [1, 2], [0, 2], [3, 4], [4, 5], [3, 5]]), epsilon_mid=0.9)
    assert s.largest == 3 and s.second_largest == 3 and s.isolated_total == 1
    assert s.mid_component_count == 1
    # the tie goes to the component holding vertex 0
    assert s.largest_per_type.tolist() == [3]


def test_largest_per_type():
    g = graph(6, [[0, 3], [3, 4], [1, 2]], counts=[3, 3])
    s = analyze(g)
    assert s.largest == 3 and s.largest_per_type.tolist() == [1, 2]
    assert s.isolated_per_type.tolist() == [0, 1]


def test_row_columns():
    row = analyze(graph(4, [[0, 1]], counts=[2, 2])).row(seed=9)
    assert list(row) == ["seed", "n", "largest", "second_largest", "isolated_total", "isolated_1",
                         "isolated_2", "largest_1", "largest_2", "mid_components", "connected"]
    assert row["seed"] == 9 and row["isolated_total"] == 2


def test_epsilon_range():
    with pytest.raises(ValueError):
        analyze(graph(3, []), epsilon_mid=1.0)


def test_component_of_examples():
    k4 = graph(4, [[i, j] for i in range(4) for j in range(i + 1, 4)])
    assert all(component_of(k4, v)[0] == 4 for v in range(4))
    assert component_of(graph(3, [[0, 1]]), 2)[0] == 1
    with pytest.raises(IndexOutOfRange):
        component_of(k4, 4)


def test_union_find_class():
    uf = UnionFind(5)
    uf.union(0, 1)
    uf.union(3, 4)
    uf.union(1, 4)
    assert uf.find(0) == uf.find(3) and uf.find(2) != uf.find(0)


def small_models():
    return [validate(ModelSpec.make([1.0], [[1.0]], LambdaOverN(1.0))),
            validate(ModelSpec.make([0.4, 0.6], [[2, 0.5], [0.5, 1]], LambdaOverN(1.5)))]


def test_analyze_agrees_with_bfs_on_1000_graphs():
    models = small_models()
    for i in range(1000):
        rs = np.random.default_rng(i)
        n = int(rs.integers(1, 201))
        g = sample_graph(models[i % 2], n, mix(3, i))
        roots = union_find_roots(g.n_total, g.edges)
        uf_size = np.bincount(roots, minlength=g.n_total)[roots]
        assert uf_size.tolist() == bfs_sizes(g.n_total, g.edges)
        s = analyze(g)
        assert s.sizes.sum() == g.n_total and s.largest >= s.second_largest
        assert s.largest_per_type.sum() == s.largest
        assert s.is_connected == (s.largest == g.n_total)
        if i % 50 == 0:
            for v in range(g.n_total):
                assert component_of(g, v)[0] == uf_size[v]


@given(st.integers(0, 2 ** 32), st.integers(2, 150))
@settings(max_examples=40, deadline=None)
def test_edge_order_invariance(seed, n):
    g = sample_graph(small_models()[1], n, seed)
    perm = np.random.default_rng(seed).permutation(len(g.edges))
    flipped = g.edges[perm][:, ::-1]
    h = Graph(g.counts, np.sort(flipped, axis=1))
    a, b = analyze(g), analyze(h)
    assert np.array_equal(a.sizes, b.sizes)
    assert np.array_equal(a.largest_per_type, b.largest_per_type)
    assert a.mid_component_count == b.mid_component_count
