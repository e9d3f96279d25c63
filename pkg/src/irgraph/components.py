"""Connected components: union-find over the edge list, plus a BFS oracle."""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numba
import numpy as np

from .sampler import Graph


@numba.njit(cache=True, nogil=True)
def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@numba.njit(cache=True, nogil=True)
def union_find_roots(n, edges):
    """Root label of every vertex (union by size, full path compression)."""
    parent = np.arange(n)
    size = np.ones(n, dtype=np.int64)
    for i in range(edges.shape[0]):
        x = _find(parent, edges[i, 0])
        y = _find(parent, edges[i, 1])
        if x == y:
            continue
        if size[x] < size[y]:
            x, y = y, x
        parent[y] = x
        size[x] += size[y]
    for v in range(n):
        _find(parent, v)
    return parent


class UnionFind:
    """Plain incremental union-find; the array kernel above is used for whole graphs."""

    def __init__(self, n):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x, y):
        x, y = self.find(x), self.find(y)
        if x == y:
            return x
        if self.size[x] < self.size[y]:
            x, y = y, x
        self.parent[y] = x
        self.size[x] += self.size[y]
        return x


@dataclass(frozen=True)
class ComponentSummary:
    sizes: np.ndarray             # descending
    largest: int
    second_largest: int
    largest_per_type: np.ndarray
    isolated_per_type: np.ndarray
    is_connected: bool
    mid_component_count: int
    n_total: int

    @property
    def isolated_total(self) -> int:
        return int(self.isolated_per_type.sum())

    @property
    def giant_plus_isolated(self) -> bool:
        return self.mid_component_count == 0 and self.second_largest <= 1

    def row(self, seed=None) -> dict:
        """Flat record for the per-replica CSV."""
        out = {"seed": seed, "n": self.n_total, "largest": self.largest,
               "second_largest": self.second_largest, "isolated_total": self.isolated_total}
        for k, x in enumerate(self.isolated_per_type, 1):
            out[f"isolated_{k}"] = int(x)
        for k, x in enumerate(self.largest_per_type, 1):
            out[f"largest_{k}"] = int(x)
        out["mid_components"] = self.mid_component_count
        out["connected"] = int(self.is_connected)
        return out


def analyze(graph: Graph, epsilon_mid: float = 0.5) -> ComponentSummary:
    """Component statistics of ``graph``.

    ``mid_component_count`` counts components other than the largest whose
    size lies in [2, floor(epsilon_mid * n)]. Among equally large components
    the one holding the smallest label is "the largest".
    """
    if not 0 < epsilon_mid < 1:
        raise ValueError("epsilon_mid must lie in (0, 1)")
    n = graph.n_total
    roots = union_find_roots(n, graph.edges)
    size_by_root = np.bincount(roots, minlength=n)
    is_root = size_by_root > 0
    sizes = np.sort(size_by_root[is_root])[::-1]
    # first vertex (in label order) of each component of maximal size
    big = size_by_root[roots] == sizes[0]
    giant_root = roots[np.argmax(big)]
    in_giant = roots == giant_root
    type_of = graph.type_of
    largest_per_type = np.bincount(type_of[in_giant], minlength=graph.m)
    indptr, _ = graph.adjacency
    isolated = np.diff(indptr) == 0
    isolated_per_type = np.bincount(type_of[isolated], minlength=graph.m)
    cap = math.floor(epsilon_mid * n)
    mid = int(np.count_nonzero((sizes >= 2) & (sizes <= cap)))
    if 2 <= sizes[0] <= cap:
        mid -= 1
    return ComponentSummary(sizes, int(sizes[0]), int(sizes[1]) if len(sizes) > 1 else 0,
                            largest_per_type, isolated_per_type, bool(sizes[0] == n), mid, n)


def component_of(graph: Graph, v: int) -> tuple[int, np.ndarray]:
    """Size of the component containing ``v`` and its per-type counts (plain BFS)."""
    graph._check(v)
    indptr, indices = graph.adjacency
    seen = np.zeros(graph.n_total, dtype=bool)
    seen[v] = True
    queue = deque([v])
    members = [v]
    while queue:
        x = queue.popleft()
        for y in indices[indptr[x]:indptr[x + 1]]:
            if not seen[y]:
                seen[y] = True
                queue.append(y)
                members.append(y)
    per_type = np.bincount(graph.type_of[members], minlength=graph.m)
    return len(members), per_type
