"""Upper and lower exploration processes with their random walks.

Vertices are removed one at a time, always the smallest active label.
The upper walk ``S`` adds, for every type ``l``, the true number of
newly activated type-``l`` neighbours plus an independent
Bin(|V^(l) \\ U_t^(l)|, p_kl) "ghost" count standing in for edges to
already-seen vertices, so that its increments have the full-graph law.
The lower process only activates neighbours among the smallest
``floor((1 - delta) n_k)`` unexplored labels of each type, and its walk
``W`` equals the active counts until the stopping time ``T_W``.

After the exploration stops (``tau`` or ``T_W``) the sets freeze on one
fixed vertex and the walks keep stepping with fully synthetic increments.

The graph-dependent part (which vertex is removed, what it activates) is
computed first by a compiled kernel; all synthetic Bernoulli sums are then
drawn in one ``rng.binomial`` call in step-major, type-minor order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .errors import BadDelta, EmptyStart
from .model import LambdaOverN, ValidatedModel, type_counts
from .rng import mix, stream
from .sampler import Graph, sample_graph
from .spectral import mean_matrix, perron

UNEXPLORED, ACTIVE, REMOVED = 0, 1, 2


# ---------------------------------------------------------------- compiled core

@numba.njit(cache=True, nogil=True)
def _heap_push(heap, size, x):
    i = size
    heap[i] = x
    while i > 0:
        parent = (i - 1) // 2
        if heap[parent] <= heap[i]:
            break
        heap[parent], heap[i] = heap[i], heap[parent]
        i = parent
    return size + 1


@numba.njit(cache=True, nogil=True)
def _heap_pop(heap, size):
    top = heap[0]
    size -= 1
    heap[0] = heap[size]
    i = 0
    while True:
        left = 2 * i + 1
        if left >= size:
            break
        child = left
        if left + 1 < size and heap[left + 1] < heap[left]:
            child = left + 1
        if heap[i] <= heap[child]:
            break
        heap[i], heap[child] = heap[child], heap[i]
        i = child
    return top, size


@numba.njit(cache=True, nogil=True)
def _bit_add(tree, i, delta):
    i += 1
    while i < tree.shape[0]:
        tree[i] += delta
        i += i & (-i)


@numba.njit(cache=True, nogil=True)
def _bit_prefix(tree, i):
    # number of marked labels < i
    s = 0
    while i > 0:
        s += tree[i]
        i -= i & (-i)
    return s


@numba.njit(cache=True, nogil=True)
def _explore_kernel(indptr, indices, type_of, offsets, start, max_steps, caps, lower):
    """Returns (v, activated, stop).

    v[s] is the vertex handled at step s+1, activated[s, l] the number of
    type-l vertices it activated, stop the first t at which the process
    froze (-1 if it never did within max_steps). ``max_steps < 0`` means
    run until the process freezes.
    """
    n = type_of.shape[0]
    m = offsets.shape[0] - 1
    status = np.zeros(n, dtype=np.int8)
    heap = np.empty(n, dtype=np.int64)
    hsize = 0
    for x in start:
        if status[x] == UNEXPLORED:
            status[x] = ACTIVE
            hsize = _heap_push(heap, hsize, x)
    tree = np.zeros(n + 1, dtype=np.int64)
    u_left = np.zeros(m, dtype=np.int64)
    for x in range(n):
        if status[x] == UNEXPLORED:
            u_left[type_of[x]] += 1
            if lower:
                _bit_add(tree, x, 1)
    limit = max_steps if max_steps >= 0 else n + 1
    vs = np.empty(limit, dtype=np.int64)
    act = np.zeros((limit, m), dtype=np.int64)
    buf = np.empty(n, dtype=np.int64)
    stop = -1
    fixed = -1
    last = -1
    steps = limit
    for s in range(limit):
        if stop < 0:
            frozen = hsize == 0
            if lower and not frozen:
                for k in range(m):
                    if u_left[k] < caps[k]:
                        frozen = True
            if frozen:
                stop = s
                fixed = heap[0] if hsize > 0 else -1
                for x in range(n):
                    if status[x] == UNEXPLORED:
                        if fixed < 0 or x < fixed:
                            fixed = x
                        break
                if fixed < 0:
                    fixed = last
                if max_steps < 0:
                    steps = s
                    break
        if stop >= 0:
            vs[s] = fixed
            continue
        v, hsize = _heap_pop(heap, hsize)
        status[v] = REMOVED
        last = v
        vs[s] = v
        nb = 0
        for j in range(indptr[v], indptr[v + 1]):
            y = indices[j]
            if status[y] != UNEXPLORED:
                continue
            if lower:
                k = type_of[y]
                rank = _bit_prefix(tree, y) - _bit_prefix(tree, offsets[k])
                if rank >= caps[k]:
                    continue
            buf[nb] = y
            nb += 1
        for j in range(nb):
            y = buf[j]
            status[y] = ACTIVE
            hsize = _heap_push(heap, hsize, y)
            act[s, type_of[y]] += 1
            u_left[type_of[y]] -= 1
            if lower:
                _bit_add(tree, y, -1)
    if stop < 0 and max_steps >= 0:
        frozen = hsize == 0
        if lower and not frozen:
            for k in range(m):
                if u_left[k] < caps[k]:
                    frozen = True
        if frozen:
            stop = limit
    return vs[:steps], act[:steps], stop


# ---------------------------------------------------------------- traces

@dataclass(frozen=True)
class ExplorationTrace:
    """Per-step counts of an exploration run; row t of R/A/U/walk is time t."""
    kind: str                 # "upper" or "lower"
    start: np.ndarray
    v: np.ndarray             # v[t-1] is the vertex handled at step t
    vtype: np.ndarray
    R: np.ndarray
    A: np.ndarray
    U: np.ndarray
    walk: np.ndarray
    stop: int | None          # tau for upper, T_W for lower; None if not reached
    counts: np.ndarray

    @property
    def steps(self) -> int:
        return len(self.v)

    @property
    def tau(self):
        return self.stop if self.kind == "upper" else None

    @property
    def t_w(self):
        return self.stop if self.kind == "lower" else None

    @property
    def removed_at_stop(self) -> int:
        """|R| at the stopping time (the component size for a single-vertex upper start)."""
        t = self.stop if self.stop is not None else self.steps
        return int(self.R[t].sum())

    def coupled_valid(self) -> np.ndarray:
        return np.all(self.walk == self.A, axis=1)

    def martingale(self, u, drift) -> np.ndarray:
        """X_t = u.S_t - drift * sum_{i<t} u_{type(v_{i+1})}, with drift = n p mu - 1."""
        u = np.asarray(u, dtype=float)
        x = self.walk @ u
        x[1:] -= drift * np.cumsum(u[self.vtype])
        return x

    def rows(self, X=None):
        m = len(self.counts)
        head = (["t", "v", "type"] + [f"R_{k}" for k in range(1, m + 1)]
                + [f"A_{k}" for k in range(1, m + 1)] + [f"U_{k}" for k in range(1, m + 1)]
                + [f"walk_{k}" for k in range(1, m + 1)] + ["X_t"])
        out = [head]
        for t in range(self.steps + 1):
            v = "" if t == 0 else int(self.v[t - 1]) + 1
            vt = "" if t == 0 else int(self.vtype[t - 1]) + 1
            x = "" if X is None else repr(float(X[t]))
            out.append([t, v, vt, *map(int, self.R[t]), *map(int, self.A[t]),
                        *map(int, self.U[t]), *map(int, self.walk[t]), x])
        return out


def _prepare(graph, start):
    start = np.unique(np.atleast_1d(np.asarray(start, dtype=np.int64)))
    if start.size == 0:
        raise EmptyStart("exploration needs at least one start vertex")
    for x in start:
        graph._check(int(x))
    return start


def _run(graph, start, max_steps, rng, probs, lower, caps):
    probs = graph.probs if probs is None else np.asarray(probs, dtype=float)
    indptr, indices = graph.adjacency
    type_of = graph.type_of
    offsets = graph.offsets.astype(np.int64)
    ms = -1 if max_steps is None else int(max_steps)
    v, act, stop = _explore_kernel(indptr, indices, type_of, offsets, start, ms, caps, lower)
    T, m = act.shape[0], graph.m
    counts = graph.counts
    vtype = type_of[v]
    live = np.arange(T) < (stop if stop >= 0 else T)
    removed = np.zeros((T, m), dtype=np.int64)
    removed[np.arange(T)[live], vtype[live]] = 1
    A0 = np.bincount(type_of[start], minlength=m)
    R = np.vstack([np.zeros(m, dtype=np.int64), np.cumsum(removed, axis=0)])
    A = np.vstack([A0, A0 + np.cumsum(act - removed, axis=0)])
    U = np.vstack([counts - A0, counts - A0 - np.cumsum(act, axis=0)])
    return v, vtype, act, live, R, A, U, probs, (None if stop < 0 else int(stop))


def upper_explore(graph: Graph, start, max_steps: int | None, rng: np.random.Generator,
                  probs=None) -> ExplorationTrace:
    """Upper exploration from ``start``; ``max_steps=None`` runs until tau.

    ``probs`` overrides the m x m edge probabilities stored on the graph
    (they only drive the ghost increments).
    """
    start = _prepare(graph, start)
    caps = np.zeros(graph.m, dtype=np.int64)
    v, vtype, act, live, R, A, U, probs, stop = _run(graph, start, max_steps, rng, probs, False, caps)
    # ghosts: vertices of type l outside U_t before the stop, all of V^(l) after it
    ghost_n = np.where(live[:, None], graph.counts - U[:-1], graph.counts)
    ghosts = rng.binomial(ghost_n, probs[vtype]) if len(v) else np.zeros_like(act)
    inc = np.where(live[:, None], act, 0) + ghosts
    inc[np.arange(len(v)), vtype] -= 1
    walk = np.vstack([A[0], A[0] + np.cumsum(inc, axis=0)])
    return ExplorationTrace("upper", start, v, vtype, R, A, U, walk, stop, graph.counts)


def lower_caps(counts, delta):
    return np.array([math.floor((1.0 - delta) * int(c)) for c in counts], dtype=np.int64)


def lower_explore(graph: Graph, start, delta: float, max_steps: int | None,
                  rng: np.random.Generator, probs=None) -> ExplorationTrace:
    """Lower exploration restricted to the smallest floor((1-delta) n_k) unexplored labels."""
    if not 0.0 < delta < 1.0:
        raise BadDelta(f"delta must lie in (0, 1), got {delta}")
    start = _prepare(graph, start)
    caps = lower_caps(graph.counts, delta)
    v, vtype, act, live, R, A, U, probs, stop = _run(graph, start, max_steps, rng, probs, True, caps)
    synth = rng.binomial(np.broadcast_to(caps, act.shape), probs[vtype]) if len(v) else act
    inc = np.where(live[:, None], act, synth)
    inc[np.arange(len(v)), vtype] -= 1
    walk = np.vstack([A[0], A[0] + np.cumsum(inc, axis=0)])
    return ExplorationTrace("lower", start, v, vtype, R, A, U, walk, stop, graph.counts)


# ---------------------------------------------------------------- martingale

@dataclass(frozen=True)
class MartingaleReport:
    mean: float
    std_error: float
    t_stat: float
    samples: int
    mu: float
    drift: float


def martingale_increments(model: ValidatedModel, n: int, replicas: int, steps: int,
                          seed: int) -> tuple[np.ndarray, float, float]:
    """Increments X_t - X_{t-1} from ``replicas`` fresh graphs, shape (replicas, steps).

    mu and u are taken from the realised type proportions n_k / n, which
    equal ``a`` whenever every a_k n is an integer; otherwise the rounding
    would leave an O(1/n) drift in the increments.
    """
    if not isinstance(model.schedule, LambdaOverN):
        raise ValueError("martingale diagnostic needs a lambda/n schedule")
    lam = model.schedule.lam
    counts = type_counts(model, n)
    L = mean_matrix((counts / n, model.c))
    pd = perron(L)
    mu, u = pd.mu, pd.u
    drift = lam * mu - 1.0
    out = np.empty((replicas, steps))
    for i in range(replicas):
        rs = mix(seed, i)
        rng = stream(rs)
        g = sample_graph(model, n, rs, rng=rng)
        x0 = int(rng.integers(g.n_total))
        tr = upper_explore(g, [x0], steps, rng)
        out[i] = np.diff(tr.martingale(u, drift))
    return out, mu, drift


def martingale_diagnostic(model: ValidatedModel, n: int, replicas: int, steps: int,
                          seed: int) -> MartingaleReport:
    inc, mu, drift = martingale_increments(model, n, replicas, steps, seed)
    flat = inc.ravel()
    mean = float(flat.mean())
    se = float(flat.std(ddof=1) / math.sqrt(flat.size)) if flat.size > 1 else math.inf
    t = 0.0 if se == 0 else mean / se
    return MartingaleReport(mean, se, t, flat.size, mu, drift)
