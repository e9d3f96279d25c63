import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from irgraph.components import union_find_roots
from irgraph.errors import BadDelta, EmptyStart
from irgraph.exploration import (lower_caps, lower_explore, martingale_diagnostic,
                                 martingale_increments, upper_explore)
from irgraph.model import LambdaOverN, ModelSpec, validate
from irgraph.rng import mix, stream
from irgraph.sampler import Graph, sample_graph


def graph(n, edges, counts=None, p=0.0):
    counts = counts or [n]
    m = len(counts)
    return Graph(np.array(counts), np.array(edges, dtype=np.int64).reshape(-1, 2),
                 probs=np.full((m, m), p))


def check_common(tr, counts):
    assert np.all(tr.R + tr.A + tr.U == counts)
    assert np.all(np.diff(tr.U, axis=0) <= 0)
    assert np.all(tr.R >= 0) and np.all(tr.A >= 0) and np.all(tr.U >= 0)


def test_isolated_start():
    g = graph(5, [[1, 2]])
    tr = upper_explore(g, [0], None, stream(0))
    assert tr.tau == 1 and tr.removed_at_stop == 1
    assert tr.v[0] == 0


def test_triangle():
    g = graph(3, [[0, 1], [0, 2], [1, 2]])
    tr = upper_explore(g, [0], None, stream(0))
    assert tr.A[1].tolist() == [2] and tr.R[1].tolist() == [1]
    assert tr.tau == 3 and tr.removed_at_stop == 3
    assert tr.v.tolist() == [0, 1, 2]


def test_exploration_picks_min_active():
    g = graph(6, [[0, 5], [0, 3], [3, 1], [5, 2]])
    tr = upper_explore(g, [0], None, stream(0))
    assert tr.v.tolist() == [0, 3, 1, 5, 2]


def test_empty_start():
    with pytest.raises(EmptyStart):
        upper_explore(graph(3, []), [], None, stream(0))


@pytest.mark.parametrize("delta", [0.0, 1.0, -0.1, 1.5])
def test_bad_delta(delta):
    with pytest.raises(BadDelta):
        lower_explore(graph(3, []), [0], delta, None, stream(0))


def test_lower_isolated_start():
    tr = lower_explore(graph(10, []), [0], 0.5, None, stream(0))
    assert tr.t_w == 1 and tr.A[1].sum() == 0


def test_post_tau_walk_continues():
    g = graph(20, [[0, 1], [1, 2]], p=0.1)
    tr = upper_explore(g, [0], 40, stream(3))
    assert tr.tau == 3 and tr.steps == 40
    assert np.all(tr.R[3:] == tr.R[3]) and np.all(tr.A[3:] == 0)
    # the fixed vertex after tau is min(A u U) = 3
    assert np.all(tr.v[3:] == 3)


def test_multi_vertex_start():
    g = graph(8, [[0, 1], [4, 5], [5, 6]])
    tr = upper_explore(g, [4, 0], None, stream(0))
    assert tr.removed_at_stop == 5


models = [validate(ModelSpec.make([1.0], [[1.0]], LambdaOverN(1.2))),
          validate(ModelSpec.make([0.3, 0.7], [[2.0, 0.8], [0.8, 1.0]], LambdaOverN(1.5)))]


@given(st.integers(0, 2 ** 40), st.integers(1, 120), st.sampled_from([0, 1]))
@settings(max_examples=80, deadline=None)
def test_upper_invariants(seed, n, which):
    g = sample_graph(models[which], n, seed)
    x = seed % g.n_total
    tr = upper_explore(g, [x], n + 10, stream(seed))
    check_common(tr, g.counts)
    roots = union_find_roots(g.n_total, g.edges)
    assert tr.tau is not None
    assert tr.removed_at_stop == np.count_nonzero(roots == roots[x])
    assert np.all(tr.walk[:tr.tau + 1] >= tr.A[:tr.tau + 1])


@given(st.integers(0, 2 ** 40), st.integers(2, 120), st.sampled_from([0, 1]),
       st.floats(0.05, 0.95))
@settings(max_examples=80, deadline=None)
def test_lower_coupling(seed, n, which, delta):
    g = sample_graph(models[which], n, seed)
    x = seed % g.n_total
    tr = lower_explore(g, [x], delta, 2 * n, stream(seed))
    check_common(tr, g.counts)
    stop = tr.t_w if tr.t_w is not None else tr.steps
    assert np.all(tr.walk[:stop + 1] == tr.A[:stop + 1])
    assert tr.coupled_valid()[:stop + 1].all()


def test_lower_matches_upper_on_low_label_component():
    # edges among labels 0..9 only; with n = 40 and delta = 0.25 the usable set holds
    # 30 labels and never shrinks below that before the component is exhausted
    rng = np.random.default_rng(5)
    for trial in range(50):
        pairs = [(i, j) for i in range(10) for j in range(i + 1, 10) if rng.random() < 0.3]
        g = graph(40, pairs, p=0.05)
        x = int(rng.integers(10))
        up = upper_explore(g, [x], None, stream(trial))
        lo = lower_explore(g, [x], 0.25, None, stream(trial))
        assert lo.t_w == up.tau
        t = up.tau
        assert np.array_equal(up.v[:t], lo.v[:t])
        for arr in ("R", "A", "U"):
            assert np.array_equal(getattr(up, arr)[:t + 1], getattr(lo, arr)[:t + 1])


def test_lower_caps_floor():
    assert lower_caps([10, 7], 0.25).tolist() == [7, 5]


def test_trace_rows():
    g = graph(4, [[0, 1]], counts=[2, 2])
    tr = upper_explore(g, [0], None, stream(0))
    head, *body = tr.rows()
    assert head == ["t", "v", "type", "R_1", "R_2", "A_1", "A_2", "U_1", "U_2",
                    "walk_1", "walk_2", "X_t"]
    assert body[0][:3] == [0, "", ""] and body[1][1:3] == [1, 1]


def test_martingale_start_value():
    g = graph(6, [[0, 1], [1, 2]], p=0.2)
    tr = upper_explore(g, [0], 10, stream(1))
    X = tr.martingale([1.0], 0.5)
    assert X[0] == tr.walk[0] @ [1.0]


def test_martingale_zero_lambda_exact():
    vm = validate(ModelSpec.make([0.5, 0.5], [[1, 2], [2, 1]], LambdaOverN(0.0)))
    inc, mu, drift = martingale_increments(vm, 50, 20, 10, seed=4)
    assert drift == -1.0
    assert np.all(inc == 0.0)


def test_martingale_single_type_critical():
    vm = validate(ModelSpec.make([1.0], [[1.0]], LambdaOverN(1.0)))
    rep = martingale_diagnostic(vm, 100, 2000, 20, seed=8)
    assert rep.drift == pytest.approx(0.0)
    assert abs(rep.t_stat) <= 3
