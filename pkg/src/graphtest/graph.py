"""Immutable simple undirected graphs stored as packed bit rows, plus edge-list I/O."""
from __future__ import annotations

from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import ParameterError, ParseError

WORD_BITS = 64


def _pack_rows(adj: np.ndarray) -> np.ndarray:
    n = adj.shape[0]
    words = max(1, -(-n // WORD_BITS))
    packed = np.packbits(adj, axis=1, bitorder="little")
    buf = np.zeros((n, words * 8), dtype=np.uint8)
    buf[:, : packed.shape[1]] = packed
    return buf.view("<u8")


class Graph:
    """Simple undirected graph on vertices ``0..n-1``.

    Row ``i`` of :attr:`rows` is the neighbourhood of ``i`` as a little-endian
    bitset split into 64-bit words. Instances are immutable; derived
    quantities (degrees, edge arrays, sparse adjacency) are cached lazily.
    """

    def __init__(self, n: int, rows: np.ndarray):
        if n < 1:
            raise ParameterError(f"graph needs at least one vertex, got n={n}")
        words = max(1, -(-n // WORD_BITS))
        rows = np.ascontiguousarray(rows, dtype="<u8")
        if rows.shape != (n, words):
            raise ParameterError(f"bit rows must have shape {(n, words)}, got {rows.shape}")
        rows.setflags(write=False)
        self._n = n
        self._rows = rows

    @classmethod
    def from_dense(cls, adj, check: bool = True) -> "Graph":
        adj = np.asarray(adj, dtype=bool)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ParameterError("adjacency must be a square matrix")
        if check:
            if adj.diagonal().any():
                raise ParameterError("self-loops are not allowed")
            if not np.array_equal(adj, adj.T):
                raise ParameterError("adjacency must be symmetric")
        return cls(adj.shape[0], _pack_rows(adj))

    @classmethod
    def from_edges(cls, n: int, u, v) -> "Graph":
        u = np.asarray(u, dtype=np.int64)
        v = np.asarray(v, dtype=np.int64)
        if n < 1:
            raise ParameterError(f"graph needs at least one vertex, got n={n}")
        if u.size and (min(u.min(), v.min()) < 0 or max(u.max(), v.max()) >= n):
            raise ParameterError("edge endpoint out of range")
        if np.any(u == v):
            raise ParameterError("self-loops are not allowed")
        adj = np.zeros((n, n), dtype=bool)
        adj[u, v] = True
        adj[v, u] = True
        return cls(n, _pack_rows(adj))

    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls(n, np.zeros((n, max(1, -(-n // WORD_BITS))), dtype="<u8"))

    @classmethod
    def complete(cls, n: int) -> "Graph":
        adj = ~np.eye(n, dtype=bool)
        return cls(n, _pack_rows(adj))

    @property
    def n(self) -> int:
        return self._n

    @property
    def rows(self) -> np.ndarray:
        return self._rows

    def dense(self) -> np.ndarray:
        bits = np.unpackbits(self._rows.view(np.uint8), axis=1, bitorder="little")
        return bits[:, : self._n].astype(bool)

    @cached_property
    def degrees(self) -> np.ndarray:
        deg = np.bitwise_count(self._rows).sum(axis=1, dtype=np.int64)
        deg.setflags(write=False)
        return deg

    @property
    def num_edges(self) -> int:
        return int(self.degrees.sum()) // 2

    @cached_property
    def edge_array(self) -> tuple[np.ndarray, np.ndarray]:
        """Edges as two index arrays ``(u, v)`` with ``u < v``, lexicographically sorted."""
        u, v = np.nonzero(np.triu(self.dense(), 1))
        u.setflags(write=False)
        v.setflags(write=False)
        return u, v

    def edges(self) -> list[tuple[int, int]]:
        u, v = self.edge_array
        return list(zip(u.tolist(), v.tolist()))

    @cached_property
    def adjacency_csr(self) -> sp.csr_matrix:
        u, v = self.edge_array
        data = np.ones(2 * u.size)
        return sp.csr_matrix(
            (data, (np.concatenate([u, v]), np.concatenate([v, u]))), shape=(self._n, self._n)
        )

    def has_edge(self, i: int, j: int) -> bool:
        return bool((int(self._rows[i, j // WORD_BITS]) >> (j % WORD_BITS)) & 1)

    def relabel(self, perm) -> "Graph":
        """Graph with vertex ``i`` renamed to ``perm[i]``."""
        perm = np.asarray(perm)
        adj = self.dense()
        out = np.zeros_like(adj)
        out[np.ix_(perm, perm)] = adj
        return Graph(self._n, _pack_rows(out))

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self._n == other._n and np.array_equal(self._rows, other._rows)

    def __hash__(self):
        return hash((self._n, self._rows.tobytes()))

    def __repr__(self):
        return f"Graph(n={self._n}, edges={self.num_edges})"


def write_edge_list(graph: Graph, path) -> None:
    lines = [f"n {graph.n}"]
    lines.extend(f"{u} {v}" for u, v in graph.edges())
    Path(path).write_text("\n".join(lines) + "\n")


def parse_edge_list(text: str) -> Graph:
    lines = text.splitlines()
    header_seen = False
    n = 0
    seen = set()
    us, vs = [], []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if not header_seen:
            if len(parts) != 2 or parts[0] != "n":
                raise ParseError("expected header 'n <count>'", lineno)
            try:
                n = int(parts[1])
            except ValueError:
                raise ParseError(f"bad vertex count {parts[1]!r}", lineno) from None
            if n < 1:
                raise ParseError(f"vertex count must be >= 1, got {n}", lineno)
            header_seen = True
            continue
        if len(parts) != 2:
            raise ParseError(f"expected 'u v', got {line!r}", lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"non-integer vertex in {line!r}", lineno) from None
        if u == v:
            raise ParseError(f"self-loop {u} {v}", lineno)
        if not (0 <= u < v < n):
            raise ParseError(f"edge {u} {v} violates 0 <= u < v < {n}", lineno)
        if (u, v) in seen:
            raise ParseError(f"duplicate edge {u} {v}", lineno)
        seen.add((u, v))
        us.append(u)
        vs.append(v)
    if not header_seen:
        raise ParseError("missing header 'n <count>'", 1)
    return Graph.from_edges(n, us, vs)


def read_edge_list(path) -> Graph:
    return parse_edge_list(Path(path).read_text())
