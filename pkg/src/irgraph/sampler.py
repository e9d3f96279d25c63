"""Graph sampling in expected O(n + |E|) time via geometric skips.

For a candidate block of ``N`` vertex pairs with success probability ``p``
the positions of present edges are generated as

    pos_0 = skip_0,  pos_{j+1} = pos_j + 1 + skip_{j+1},
    skip = floor(log(U) / log(1 - p)),  U ~ Uniform(0, 1],

which is the law of independent Bernoulli(p) trials. Within-type blocks
enumerate the strict upper triangle row-major; cross-type blocks (k < l)
enumerate the full n_k x n_l rectangle row-major. Blocks are visited in
lexicographic (k, l) order from a single stream, so a (model, n, seed)
triple fixes the edge list bit for bit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import IndexOutOfRange
from .model import (ValidatedBlockModel, ValidatedModel, probability_matrix,
                    type_counts)
from .rng import stream


@dataclass(frozen=True, eq=False)
class Graph:
    """Simple undirected graph on 0-based labels with a contiguous type layout.

    ``counts[g]`` vertices carry global type ``g``; ``block_of_type[g]`` is the
    block of that type (all zero for single-block models). ``edges`` has
    ``u < v`` in every row.
    """
    counts: np.ndarray
    edges: np.ndarray
    seed: int | None = None
    block_of_type: np.ndarray | None = None
    probs: np.ndarray | None = None        # m x m edge probabilities used to draw it
    _csr: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        object.__setattr__(self, "counts", counts)
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        object.__setattr__(self, "edges", edges)
        if self.block_of_type is None:
            object.__setattr__(self, "block_of_type", np.zeros(len(counts), dtype=np.int64))
        probs = np.zeros((len(counts), len(counts))) if self.probs is None else self.probs
        object.__setattr__(self, "probs", np.asarray(probs, dtype=float))

    @property
    def n_total(self) -> int:
        return int(self.counts.sum())

    @property
    def m(self) -> int:
        return len(self.counts)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum(self.counts)])

    @property
    def type_of(self) -> np.ndarray:
        return np.repeat(np.arange(self.m), self.counts)

    @property
    def block_of(self) -> np.ndarray:
        return self.block_of_type[self.type_of]

    @property
    def adjacency(self) -> tuple[np.ndarray, np.ndarray]:
        """CSR ``(indptr, indices)``; neighbour lists are sorted ascending."""
        if self._csr is None:
            object.__setattr__(self, "_csr", build_csr(self.n_total, self.edges))
        return self._csr

    def neighbors(self, v: int) -> np.ndarray:
        self._check(v)
        indptr, indices = self.adjacency
        return indices[indptr[v]:indptr[v + 1]]

    def _check(self, v):
        if not 0 <= v < self.n_total:
            raise IndexOutOfRange(f"vertex {v} not in [0, {self.n_total})")


def build_csr(n: int, edges: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    src = np.concatenate([edges[:, 0], edges[:, 1]])
    dst = np.concatenate([edges[:, 1], edges[:, 0]])
    order = np.lexsort((dst, src))
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
    return indptr, dst[order]


def degree(graph: Graph, v: int) -> int:
    graph._check(v)
    indptr, _ = graph.adjacency
    return int(indptr[v + 1] - indptr[v])


# ---------------------------------------------------------------- skip sampling

def bernoulli_positions(rng: np.random.Generator, total: int, p: float) -> np.ndarray:
    """Sorted indices in [0, total) kept independently with probability p."""
    if total <= 0 or p <= 0.0:
        return np.empty(0, dtype=np.int64)
    if p >= 1.0:
        return np.arange(total, dtype=np.int64)
    log_q = math.log1p(-p)
    mean = total * p
    batch = int(mean + 4.0 * math.sqrt(mean) + 16)
    chunks = []
    last = -1
    while True:
        u = 1.0 - rng.random(batch)
        skips = np.floor(np.log(u) / log_q)
        np.minimum(skips, float(total), out=skips)
        pos = last + np.cumsum(skips.astype(np.int64) + 1)
        if pos[-1] >= total:
            chunks.append(pos[pos < total])
            break
        chunks.append(pos)
        last = int(pos[-1])
    return np.concatenate(chunks)


def _upper_triangle_pairs(idx: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Decode row-major strict-upper-triangle indices of an n x n block."""
    if idx.size == 0:
        return idx, idx
    two_n1 = 2 * n - 1
    disc = np.maximum(float(two_n1) ** 2 - 8.0 * idx, 0.0)
    row = np.floor((two_n1 - np.sqrt(disc)) / 2.0).astype(np.int64)
    row = np.clip(row, 0, n - 2)

    def offset(r):
        return r * (two_n1 - r) // 2

    for _ in range(3):
        row = np.where(offset(row) > idx, row - 1, row)
        row = np.where(offset(row + 1) <= idx, row + 1, row)
    col = idx - offset(row) + row + 1
    return row, col


def _type_pair_edges(rng, n_k, n_l, off_k, off_l, p, same):
    if same:
        idx = bernoulli_positions(rng, n_k * (n_k - 1) // 2, p)
        r, c = _upper_triangle_pairs(idx, n_k)
    else:
        idx = bernoulli_positions(rng, n_k * n_l, p)
        r, c = np.divmod(idx, n_l)
    return np.stack([r + off_k, c + off_l], axis=1)


def _sample_types(rng, counts, offsets, probs):
    out = []
    m = len(counts)
    for k in range(m):
        for l in range(k, m):
            out.append(_type_pair_edges(rng, int(counts[k]), int(counts[l]),
                                        int(offsets[k]), int(offsets[l]), probs[k, l], k == l))
    return out


def sample_graph(model: ValidatedModel, n: int, seed: int, b: float | None = None,
                 rng: np.random.Generator | None = None) -> Graph:
    """Draw one graph; ``b`` is needed only for the critical-window schedule."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = stream(seed) if rng is None else rng
    counts = type_counts(model, n)
    offsets = np.concatenate([[0], np.cumsum(counts)])
    probs = probability_matrix(model, n, b)
    parts = _sample_types(rng, counts, offsets, probs)
    edges = np.concatenate(parts) if parts else np.empty((0, 2), dtype=np.int64)
    return Graph(counts, edges, seed, probs=probs)


def sample_block_graph(model: ValidatedBlockModel, n: int, seed: int,
                       b: float | None = None) -> Graph:
    """Disjoint union of the blocks plus sparse inter-block edges at rate d * p'(n)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = stream(seed)
    counts = np.concatenate([type_counts(blk, n) for blk in model.blocks])
    offsets = np.concatenate([[0], np.cumsum(counts)])
    toff = model.spec.type_offsets
    block_of_type = np.repeat(np.arange(model.r), np.diff(toff))
    M = len(counts)
    probs = np.zeros((M, M))
    parts = []
    for i, blk in enumerate(model.blocks):
        lo, hi = toff[i], toff[i + 1]
        probs[lo:hi, lo:hi] = probability_matrix(blk, n, b)
        parts += _sample_types(rng, counts[lo:hi], offsets[lo:hi], probs[lo:hi, lo:hi])
    p_inter = model.spec.inter_schedule(n)
    d = model.d
    for g in range(M):
        for h in range(g + 1, M):
            if block_of_type[g] == block_of_type[h]:
                continue
            p = min(1.0, d[g, h] * p_inter)
            probs[g, h] = probs[h, g] = p
            parts.append(_type_pair_edges(rng, int(counts[g]), int(counts[h]),
                                          int(offsets[g]), int(offsets[h]), p, False))
    edges = np.concatenate(parts) if parts else np.empty((0, 2), dtype=np.int64)
    return Graph(counts, edges, seed, block_of_type, probs)


# ---------------------------------------------------------------- export

def export_edge_list(graph: Graph, path) -> None:
    """Write ``u v`` lines, 1-based, sorted, under a ``# n=.. m_types=.. seed=..`` header."""
    e = graph.edges
    order = np.lexsort((e[:, 1], e[:, 0]))
    e = e[order] + 1
    with Path(path).open("w") as fh:
        fh.write(f"# n={graph.n_total} m_types={graph.m} seed={graph.seed}\n")
        np.savetxt(fh, e, fmt="%d")


def read_edge_list(path) -> Graph:
    """Inverse of :func:`export_edge_list` for single-type-layout checks.

    Only ``n`` is recoverable from the header, so the result has one type.
    """
    lines = Path(path).read_text().splitlines()
    header = dict(tok.split("=") for tok in lines[0].lstrip("# ").split())
    body = [ln.split() for ln in lines[1:] if ln.strip()]
    edges = np.array(body, dtype=np.int64).reshape(-1, 2) - 1
    seed = None if header["seed"] == "None" else int(header["seed"])
    return Graph(np.array([int(header["n"])]), edges, seed)
