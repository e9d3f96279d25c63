import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from irgraph.errors import IndexOutOfRange
from irgraph.model import (BlockModelSpec, Custom, LambdaOverN, LogSqOverN2, ModelSpec,
                           type_counts, validate, validate_blocks)
from irgraph.rng import mix, stream
from irgraph.sampler import (Graph, _upper_triangle_pairs, bernoulli_positions, degree,
                             export_edge_list, read_edge_list, sample_block_graph, sample_graph)


def model(a, c, lam):
    return validate(ModelSpec.make(a, c, LambdaOverN(lam)))


def assert_simple(g):
    e = g.edges
    assert np.all(e[:, 0] < e[:, 1])
    assert np.all(e >= 0) and np.all(e < g.n_total)
    assert len(np.unique(e, axis=0)) == len(e)
    indptr, _ = g.adjacency
    assert indptr[-1] == 2 * len(e)


def test_lambda_zero_is_empty():
    g = sample_graph(model([1.0], [[1.0]], 0.0), 100, 1)
    assert g.n_edges == 0 and g.n_total == 100


def test_clamped_probability_gives_complete_graph():
    g = sample_graph(model([1.0], [[1.0]], 10.0), 4, 1)
    assert g.n_edges == 6
    assert sorted(map(tuple, g.edges.tolist())) == list(itertools.combinations(range(4), 2))
    assert all(degree(g, v) == 3 for v in range(4))


def test_degree_examples():
    empty = Graph(np.array([5]), np.empty((0, 2)))
    assert degree(empty, 0) == 0
    star = Graph(np.array([5]), np.array([[0, i] for i in range(1, 5)]))
    assert degree(star, 0) == 4 and degree(star, 1) == 1
    with pytest.raises(IndexOutOfRange):
        degree(star, 5)
    with pytest.raises(IndexOutOfRange):
        star.neighbors(-1)


def test_bipartite_edge_count_mean():
    vm = model([0.5, 0.5], [[0, 1], [1, 0]], 2.0)
    n = 10_000
    counts = [sample_graph(vm, n, mix(7, i)).n_edges for i in range(200)]
    p = 2.0 / n
    mean, var = 5000 * 5000 * p, 5000 * 5000 * p * (1 - p)
    assert abs(np.mean(counts) - mean) <= 3 * math.sqrt(var / 200)
    g = sample_graph(vm, n, 1)
    t = g.type_of
    assert np.all(t[g.edges[:, 0]] != t[g.edges[:, 1]])


def test_degree_mean_per_type():
    vm = model([0.3, 0.7], [[1.0, 2.0], [2.0, 0.5]], 3.0)
    n = 2000
    counts = type_counts(vm, n)
    degs = {0: [], 1: []}
    for i in range(200):
        g = sample_graph(vm, n, mix(11, i))
        indptr, _ = g.adjacency
        d = np.diff(indptr)
        degs[0].append(d[0])
        degs[1].append(d[-1])
    for k in range(2):
        p = vm.c[k] * 3.0 / n
        trials = counts - (np.arange(2) == k)
        mean = float(trials @ p)
        var = float(trials @ (p * (1 - p)))
        assert abs(np.mean(degs[k]) - mean) <= 3 * math.sqrt(var / 200)


def test_deterministic_given_seed(two_type):
    g1, g2 = sample_graph(two_type, 5000, 99), sample_graph(two_type, 5000, 99)
    assert np.array_equal(g1.edges, g2.edges)
    assert not np.array_equal(g1.edges, sample_graph(two_type, 5000, 100).edges)


@given(st.integers(1, 300), st.floats(0.0, 20.0), st.integers(0, 2 ** 63))
@settings(max_examples=60, deadline=None)
def test_samples_are_simple(n, lam, seed):
    vm = model([0.2, 0.3, 0.5], [[1, 2, 0], [2, 0, 1], [0, 1, 3]], lam)
    assert_simple(sample_graph(vm, n, seed))


@pytest.mark.parametrize("n", [2, 3, 7, 60])
def test_upper_triangle_decoding_exhaustive(n):
    idx = np.arange(n * (n - 1) // 2)
    r, c = _upper_triangle_pairs(idx, n)
    assert list(zip(r.tolist(), c.tolist())) == list(itertools.combinations(range(n), 2))


def test_upper_triangle_decoding_large():
    n = 1_000_000
    total = n * (n - 1) // 2
    rows = np.array([0, 1, 2, n // 2, n - 3, n - 2])
    starts = rows * (2 * n - 1 - rows) // 2
    idx = np.concatenate([starts, starts + (n - 2 - rows)])   # first and last column of each row
    r, c = _upper_triangle_pairs(idx, n)
    assert np.array_equal(r, np.concatenate([rows, rows]))
    assert np.array_equal(c, np.concatenate([rows + 1, np.full(len(rows), n - 1)]))
    assert idx.max() == total - 1


def test_bernoulli_positions_law():
    total, p, reps = 12, 0.3, 20_000
    rng = stream(5)
    hits = np.zeros(total)
    sizes = np.zeros(reps, dtype=int)
    for i in range(reps):
        pos = bernoulli_positions(rng, total, p)
        assert np.all(np.diff(pos) > 0)
        hits[pos] += 1
        sizes[i] = len(pos)
    se = math.sqrt(p * (1 - p) / reps)
    assert np.all(np.abs(hits / reps - p) <= 4 * se)
    expected = stats.binom.pmf(np.arange(total + 1), total, p) * reps
    keep = expected >= 5
    obs = np.bincount(sizes, minlength=total + 1)
    f_obs = np.append(obs[keep], obs[~keep].sum())
    f_exp = np.append(expected[keep], expected[~keep].sum())
    assert stats.chisquare(f_obs, f_exp * f_obs.sum() / f_exp.sum()).pvalue > 1e-3


def test_bernoulli_positions_edges():
    rng = stream(0)
    assert bernoulli_positions(rng, 0, 0.5).size == 0
    assert bernoulli_positions(rng, 10, 0.0).size == 0
    assert bernoulli_positions(rng, 5, 1.0).tolist() == [0, 1, 2, 3, 4]


def blocks(inter, sched=LambdaOverN(1.0), d=((0, 1), (1, 0))):
    blk = ModelSpec.make([1.0], [[1.0]], sched)
    return validate_blocks(BlockModelSpec((blk, blk), d, inter))


def test_block_zero_rate_has_no_inter_edges():
    g = sample_block_graph(blocks(Custom(((500, 0.0),))), 500, 3)
    b = g.block_of
    assert np.all(b[g.edges[:, 0]] == b[g.edges[:, 1]])
    assert g.n_total == 1000 and set(b.tolist()) == {0, 1}


def test_block_inter_edge_mean():
    n = 50_000
    vm = blocks(LogSqOverN2())
    counts = []
    for i in range(200):
        g = sample_block_graph(vm, n, mix(21, i))
        b = g.block_of
        counts.append(int(np.count_nonzero(b[g.edges[:, 0]] != b[g.edges[:, 1]])))
    p = LogSqOverN2()(n)
    mean, var = n * n * p, n * n * p * (1 - p)
    assert abs(np.mean(counts) - mean) <= 3 * math.sqrt(var / 200)


def test_single_block_matches_sample_graph(two_type):
    vb = validate_blocks(BlockModelSpec((two_type.spec,), ((0, 0), (0, 0)), LogSqOverN2()))
    for seed in range(5):
        assert np.array_equal(sample_block_graph(vb, 3000, seed).edges,
                              sample_graph(two_type, 3000, seed).edges)


def test_export_roundtrip(tmp_path, er2):
    g = sample_graph(er2, 300, 17)
    path = tmp_path / "edges.txt"
    export_edge_list(g, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "# n=300 m_types=1 seed=17"
    pairs = [tuple(map(int, ln.split())) for ln in lines[1:]]
    assert pairs == sorted(pairs) and all(1 <= u < v <= 300 for u, v in pairs)
    back = read_edge_list(path)
    assert back.n_total == 300 and back.seed == 17
    assert sorted(map(tuple, back.edges.tolist())) == sorted(map(tuple, g.edges.tolist()))
