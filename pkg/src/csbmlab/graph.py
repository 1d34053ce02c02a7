"""Immutable graph containers and basic structural statistics."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Optional

import numpy as np
import scipy.sparse as sp


def _readonly(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Graph:
    """Simple undirected graph on nodes ``0..n-1``.

    Edges are stored once as ``(u, v)`` with ``u < v`` in lexicographic
    order; ``indptr``/``indices`` give the sorted neighbor list of every node.
    Build instances with :meth:`from_edges`.
    """

    n: int
    edges: np.ndarray
    indptr: np.ndarray = field(repr=False)
    indices: np.ndarray = field(repr=False)

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        n = int(n)
        if n < 0:
            raise ValueError("node count must be non-negative")
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if e.size:
            if e.min() < 0 or e.max() >= n:
                raise ValueError(f"edge endpoint out of range for n={n}")
            if np.any(e[:, 0] == e[:, 1]):
                raise ValueError("self-loops are not allowed")
            e = np.sort(e, axis=1)
            e = np.unique(e, axis=0)
        else:
            e = np.empty((0, 2), dtype=np.int64)

        # CSR over both directions; lexsort keeps neighbor lists ascending
        src = np.concatenate([e[:, 0], e[:, 1]])
        dst = np.concatenate([e[:, 1], e[:, 0]])
        order = np.lexsort((dst, src))
        indices = dst[order]
        counts = np.bincount(src, minlength=n)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        return cls(n, _readonly(e), _readonly(indptr), _readonly(indices))

    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls.from_edges(n, [])

    @property
    def n_edges(self) -> int:
        return int(self.edges.shape[0])

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def degree(self) -> np.ndarray:
        return np.diff(self.indptr)

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        """Symmetric 0/1 adjacency as a CSR matrix (float64)."""
        data = np.ones(self.indices.shape[0])
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.neighbors(u)
        k = np.searchsorted(nb, v)
        return bool(k < nb.shape[0] and nb[k] == v)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.edges, other.edges)

    def __hash__(self) -> int:
        return hash((self.n, self.edges.tobytes()))


@dataclass(frozen=True, eq=False)
class LabeledGraph:
    """A graph with one class per node and optional node features."""

    graph: Graph
    labels: np.ndarray
    k: int
    features: Optional[np.ndarray] = None

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        if labels.shape != (self.graph.n,):
            raise ValueError(
                f"labels has shape {labels.shape}, expected ({self.graph.n},)")
        if labels.size and (labels.min() < 0 or labels.max() >= self.k):
            raise ValueError(f"labels must lie in [0, {self.k})")
        object.__setattr__(self, "labels", _readonly(labels.copy()))
        if self.features is not None:
            X = np.array(self.features, dtype=np.float64)
            if X.ndim != 2 or X.shape[0] != self.graph.n:
                raise ValueError(
                    f"features must have {self.graph.n} rows, got shape {X.shape}")
            if not np.all(np.isfinite(X)):
                raise ValueError("features must be finite")
            object.__setattr__(self, "features", _readonly(X))

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def m_feat(self) -> int:
        return 0 if self.features is None else int(self.features.shape[1])

    def with_graph(self, graph: Graph) -> "LabeledGraph":
        return LabeledGraph(graph, self.labels, self.k, self.features)

    def with_features(self, features) -> "LabeledGraph":
        return LabeledGraph(self.graph, self.labels, self.k, features)


class GraphStats(NamedTuple):
    avg_degree: float
    max_degree: int
    edge_homophily: float


def degree_sequence(g: Graph) -> np.ndarray:
    return g.degree().copy()


def block_edge_counts(g: Graph, labels, k: Optional[int] = None) -> np.ndarray:
    """Symmetric ``k x k`` matrix of edge tallies between and within classes.

    Entry ``(a, b)`` counts edges whose endpoint classes are ``{a, b}``, so
    the upper triangle (with the diagonal) sums to the edge count.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (g.n,):
        raise ValueError(
            f"label vector has length {labels.shape[0] if labels.ndim else 0}, "
            f"graph has {g.n} nodes")
    if k is None:
        k = int(labels.max()) + 1 if labels.size else 0
    a = labels[g.edges[:, 0]]
    b = labels[g.edges[:, 1]]
    counts = np.zeros((k, k), dtype=np.int64)
    np.add.at(counts, (a, b), 1)
    sym = counts + counts.T
    sym[np.diag_indices(k)] = np.diag(counts)
    return sym


def graph_stats(g: Graph, labels) -> GraphStats:
    labels = np.asarray(labels)
    deg = g.degree()
    avg = 2.0 * g.n_edges / g.n if g.n else 0.0
    if g.n_edges:
        same = labels[g.edges[:, 0]] == labels[g.edges[:, 1]]
        hom = float(same.mean())
    else:
        hom = 0.0
    return GraphStats(avg, int(deg.max()) if g.n else 0, hom)


def triangle_count(g: Graph) -> int:
    A = g.adjacency
    return int(round((A @ A).multiply(A).sum() / 6.0))
