"""Seeded G(n, p) sampling with dense bit-matrix or sparse CSR storage.

Both representations are filled from the same stream of draws, so a given
``(n, p, seed)`` yields the same edge set whichever storage is chosen.  Pairs are
drawn in tiles of ``TILE x TILE`` over the upper triangle, tiles visited in
row-major order and entries within a tile in row-major order.  Each pair
``(i, j)`` with ``i < j`` is an edge iff its 32-bit draw is below
``round(p * 2**32)``.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

TILE = 1024
DENSE_MAX_N = 60_000
DENSE_MIN_EXPECTED_DEGREE = 64


class MemoryGuardError(ValueError):
    """Raised when a dense adjacency would not fit the desk-scale budget."""


def dense_bytes(n: int) -> int:
    return n * _row_bytes(n)


def _row_bytes(n: int) -> int:
    return ((n + 63) // 64) * 8


def check_dense_memory(n: int) -> None:
    if n > DENSE_MAX_N:
        mb = dense_bytes(n) / 2**20
        raise MemoryGuardError(
            f"dense adjacency for n={n} needs {mb:.0f} MiB; "
            f"refusing n > {DENSE_MAX_N}"
        )


@dataclass(frozen=True)
class VertexSubset:
    members: frozenset
    universe_n: int

    def __post_init__(self):
        members = frozenset(int(v) for v in self.members)
        object.__setattr__(self, "members", members)
        if members and (min(members) < 0 or max(members) >= self.universe_n):
            raise ValueError("subset members must lie in {0..universe_n-1}")

    @classmethod
    def from_mask(cls, mask: np.ndarray) -> "VertexSubset":
        mask = np.asarray(mask, dtype=bool)
        return cls(frozenset(np.flatnonzero(mask).tolist()), mask.size)

    @cached_property
    def mask(self) -> np.ndarray:
        m = np.zeros(self.universe_n, dtype=bool)
        if self.members:
            m[np.fromiter(self.members, dtype=np.int64)] = True
        return m

    @cached_property
    def _words(self) -> np.ndarray:
        return _pack_mask(self.mask)

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, v) -> bool:
        return v in self.members


def _pack_mask(mask: np.ndarray) -> np.ndarray:
    n = mask.size
    buf = np.zeros(_row_bytes(n), dtype=np.uint8)
    buf[: (n + 7) // 8] = np.packbits(mask, bitorder="little")
    return buf.view(np.uint64)


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected simple graph on ``{0..n-1}``.

    Exactly one of ``words`` (dense, ``n x W`` uint64 bit rows) or
    ``indptr``/``indices`` (sparse CSR with sorted neighbour lists) is set.
    """

    n: int
    gen_seed: int | None = None
    p_nominal: float | None = None
    words: np.ndarray | None = field(default=None, repr=False)
    indptr: np.ndarray | None = field(default=None, repr=False)
    indices: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("graph needs at least one vertex")
        if (self.words is None) == (self.indptr is None):
            raise ValueError("exactly one representation must be provided")
        for arr in (self.words, self.indptr, self.indices):
            if arr is not None:
                arr.setflags(write=False)

    @property
    def is_dense(self) -> bool:
        return self.words is not None

    # -- basic queries -----------------------------------------------------

    def _row_bits(self, v: int) -> np.ndarray:
        return np.unpackbits(self.words[v].view(np.uint8), bitorder="little", count=self.n)

    def neighbors(self, v: int) -> np.ndarray:
        self._check_vertex(v)
        if self.is_dense:
            return np.flatnonzero(self._row_bits(v))
        return np.asarray(self.indices[self.indptr[v] : self.indptr[v + 1]], dtype=np.int64)

    def has_edge(self, u: int, v: int) -> bool:
        self._check_vertex(u)
        self._check_vertex(v)
        if self.is_dense:
            return bool((int(self.words[u, v >> 6]) >> (v & 63)) & 1)
        row = self.indices[self.indptr[u] : self.indptr[u + 1]]
        i = np.searchsorted(row, v)
        return bool(i < row.size and row[i] == v)

    @cached_property
    def degrees(self) -> np.ndarray:
        if self.is_dense:
            return np.bitwise_count(self.words).sum(axis=1, dtype=np.int64)
        return np.diff(self.indptr).astype(np.int64)

    def degree(self, v: int) -> int:
        self._check_vertex(v)
        return int(self.degrees[v])

    @property
    def edge_count(self) -> int:
        return int(self.degrees.sum()) // 2

    @property
    def min_degree(self) -> int:
        return int(self.degrees.min())

    def edges(self) -> np.ndarray:
        """All edges as an ``(m, 2)`` array, ``u < v``, lexicographically sorted."""
        out = []
        for u in range(self.n):
            nb = self.neighbors(u)
            nb = nb[nb > u]
            if nb.size:
                out.append(np.column_stack([np.full(nb.size, u, dtype=np.int64), nb]))
        if not out:
            return np.zeros((0, 2), dtype=np.int64)
        return np.concatenate(out)

    # -- subset-restricted degrees ------------------------------------------

    def degree_in(self, v: int, s: VertexSubset) -> int:
        """Number of neighbours of ``v`` inside ``s`` (``v`` itself never counts)."""
        self._check_vertex(v)
        if s.universe_n != self.n:
            raise ValueError("subset universe does not match graph order")
        if self.is_dense:
            return int(np.bitwise_count(self.words[v] & s._words).sum())
        return int(s.mask[self.neighbors(v)].sum())

    def degree_profile(self, v: int, parts: Sequence[VertexSubset]) -> np.ndarray:
        """Neighbour counts of ``v`` in each of the pairwise disjoint ``parts``."""
        labels = np.full(self.n, -1, dtype=np.int64)
        for i, part in enumerate(parts):
            if part.universe_n != self.n:
                raise ValueError("subset universe does not match graph order")
            if np.any(labels[part.mask] >= 0):
                raise ValueError("parts must be pairwise disjoint")
            labels[part.mask] = i
        lab = labels[self.neighbors(v)]
        lab = lab[lab >= 0]
        return np.bincount(lab, minlength=len(parts)).astype(np.int64)

    def label_counts(self, labels: np.ndarray, k: int, chunk: int = 4096) -> np.ndarray:
        """``(n, k)`` matrix: entry ``[v, i]`` counts neighbours of ``v`` labelled ``i``.

        ``labels`` holds values in ``0..k-1``.  This is the whole-graph version of
        ``degree_profile`` used by the dynamics.
        """
        labels = np.asarray(labels)
        if labels.shape != (self.n,):
            raise ValueError("labels must have one entry per vertex")
        out = np.empty((self.n, k), dtype=np.int64)
        if self.is_dense:
            masks = [_pack_mask(labels == i) for i in range(k)]
            for a in range(0, self.n, chunk):
                rows = self.words[a : a + chunk]
                for i, m in enumerate(masks):
                    out[a : a + chunk, i] = np.bitwise_count(rows & m).sum(axis=1, dtype=np.int64)
            return out
        deg = np.diff(self.indptr)
        src = np.repeat(np.arange(self.n, dtype=np.int64), deg)
        flat = np.bincount(src * k + labels[self.indices], minlength=self.n * k)
        return flat.reshape(self.n, k).astype(np.int64)

    # -- conversions ------------------------------------------------------------

    def to_sparse(self) -> "Graph":
        if not self.is_dense:
            return self
        return _from_edges(self.n, self.edges(), self.gen_seed, self.p_nominal, dense=False)

    def to_dense(self) -> "Graph":
        if self.is_dense:
            return self
        return _from_edges(self.n, self.edges(), self.gen_seed, self.p_nominal, dense=True)

    def _check_vertex(self, v: int) -> None:
        if not 0 <= v < self.n:
            raise ValueError(f"vertex {v} outside 0..{self.n - 1}")


def _threshold(p: float) -> int:
    return int(round(p * 2**32))


def _tiles(n: int, p: float, seed: int):
    """Yield ``(a, c, tile)`` boolean upper-triangle tiles in canonical order."""
    rng = np.random.default_rng(seed)
    thr = _threshold(p)
    for a in range(0, n, TILE):
        b = min(n, a + TILE)
        for c in range(a, n, TILE):
            d = min(n, c + TILE)
            if thr <= 0:
                t = np.zeros((b - a, d - c), dtype=bool)
            elif thr >= 2**32:
                t = np.ones((b - a, d - c), dtype=bool)
            else:
                r = rng.integers(0, 2**32, size=(b - a) * (d - c), dtype=np.uint32)
                t = r.reshape(b - a, d - c) < np.uint32(thr)
            if c == a:
                t = np.triu(t, 1)
            yield a, c, t


def sample_gnp(n: int, p: float, seed: int, representation: str = "auto") -> Graph:
    """Sample G(n, p) deterministically from ``seed``.

    ``representation`` is ``"dense"``, ``"sparse"`` or ``"auto"`` (dense when the
    expected degree ``p * n`` is at least 64).
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if representation == "auto":
        dense = p * n >= DENSE_MIN_EXPECTED_DEGREE
    elif representation in ("dense", "sparse"):
        dense = representation == "dense"
    else:
        raise ValueError(f"unknown representation {representation!r}")

    if dense:
        check_dense_memory(n)
        nb = _row_bytes(n)
        A = np.zeros((n, nb), dtype=np.uint8)
        for a, c, t in _tiles(n, p, seed):
            b, d = a + t.shape[0], c + t.shape[1]
            A[a:b, c // 8 : (d + 7) // 8] |= np.packbits(t, axis=1, bitorder="little")
            A[c:d, a // 8 : (b + 7) // 8] |= np.packbits(t.T, axis=1, bitorder="little")
        return Graph(n, seed, p, words=A.view(np.uint64))

    pairs = []
    for a, c, t in _tiles(n, p, seed):
        i, j = np.nonzero(t)
        if i.size:
            pairs.append(np.column_stack([i + a, j + c]))
    edges = np.concatenate(pairs) if pairs else np.zeros((0, 2), dtype=np.int64)
    return _from_edges(n, edges, seed, p, dense=False)


def _from_edges(n, edges, gen_seed, p_nominal, dense: bool) -> Graph:
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if edges.size and (edges.min() < 0 or edges.max() >= n):
        raise ValueError("edge endpoint out of range")
    if np.any(edges[:, 0] == edges[:, 1]):
        raise ValueError("self-loops are not allowed")
    if dense:
        check_dense_memory(n)
        words = np.zeros((n, _row_bytes(n) // 8), dtype=np.uint64)
        u, v = edges[:, 0], edges[:, 1]
        for x, y in ((u, v), (v, u)):
            np.bitwise_or.at(words, (x, y >> 6), np.left_shift(np.uint64(1), (y & 63).astype(np.uint64)))
        return Graph(n, gen_seed, p_nominal, words=words)
    src = np.concatenate([edges[:, 0], edges[:, 1]])
    dst = np.concatenate([edges[:, 1], edges[:, 0]])
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    keep = np.ones(src.size, dtype=bool)
    keep[1:] = (src[1:] != src[:-1]) | (dst[1:] != dst[:-1])
    src, dst = src[keep], dst[keep]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
    return Graph(n, gen_seed, p_nominal, indptr=indptr, indices=dst.astype(np.int64))


def graph_from_edges(n: int, edges: Iterable, representation: str = "auto") -> Graph:
    edges = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
    edges = edges.reshape(-1, 2)
    if representation == "auto":
        dense = 2 * len(edges) / n >= DENSE_MIN_EXPECTED_DEGREE
    else:
        dense = representation == "dense"
    return _from_edges(n, edges, None, None, dense)


def write_edge_list(g: Graph, f) -> None:
    """Write ``n m`` then one ``u v`` line per edge in ascending order."""
    if isinstance(f, (str, os.PathLike)):
        with open(f, "w") as fh:
            return write_edge_list(g, fh)
    edges = g.edges()
    f.write(f"{g.n} {len(edges)}\n")
    for u, v in edges:
        f.write(f"{u} {v}\n")


def read_edge_list(f, representation: str = "auto") -> Graph:
    if isinstance(f, (str, os.PathLike)):
        with open(f) as fh:
            return read_edge_list(fh, representation)
    header = f.readline().split()
    if len(header) != 2:
        raise ValueError("edge list must start with 'n m'")
    n, m = int(header[0]), int(header[1])
    body = f.read()
    edges = np.loadtxt(io.StringIO(body), dtype=np.int64, ndmin=2) if body.strip() else np.zeros((0, 2), np.int64)
    if len(edges) != m:
        raise ValueError(f"header promises {m} edges, found {len(edges)}")
    if m and np.any(edges[:, 0] >= edges[:, 1]):
        raise ValueError("edges must be written as 'u v' with u < v")
    return graph_from_edges(n, edges, representation)
