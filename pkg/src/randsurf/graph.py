"""Directed site link graph with URL interning, plus the visited subgraph
used by the click-weighted surfer."""

from __future__ import annotations

import math
from typing import Iterable, Mapping, Optional

import numpy as np


def sublinear_scale(t) -> float:
    """``0`` for ``t == 0``, else ``1 + ln t``."""
    if t < 0:
        raise ValueError("transition count must be non-negative")
    return 0.0 if t == 0 else 1.0 + math.log(t)


class LinkGraph:
    """Immutable weighted digraph stored as source-major CSR arrays.

    ``indices[indptr[i]:indptr[i+1]]`` are the link targets of node ``i``
    and ``weights`` the matching positive edge weights. Node ids follow
    first-seen URL order.
    """

    def __init__(self, urls, indptr, indices, weights, origin=None):
        self.urls = list(urls)
        self.index = {u: i for i, u in enumerate(self.urls)}
        if len(self.index) != len(self.urls):
            raise ValueError("duplicate URL in node table")
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int64)
        self.weights = np.asarray(weights, dtype=np.float64)
        if self.indptr.shape != (len(self.urls) + 1,):
            raise ValueError("indptr length must be n + 1")
        if np.any(self.weights <= 0):
            raise ValueError("edge weights must be positive")
        # original ids when this graph is a subgraph of another
        self.origin = None if origin is None else np.asarray(origin, dtype=np.int64)
        self._edge_set = None
        for arr in (self.indptr, self.indices, self.weights):
            arr.flags.writeable = False

    @classmethod
    def from_edges(cls, edges: Iterable, nodes: Optional[Iterable[str]] = None) -> "LinkGraph":
        """Build from ``(source, target)`` or ``(source, target, weight)`` rows.

        Parallel rows collapse onto the first occurrence.
        """
        urls: list = []
        index: dict = {}

        def intern(u):
            i = index.get(u)
            if i is None:
                i = index[u] = len(urls)
                urls.append(u)
            return i

        for u in nodes or ():
            intern(u)
        out: dict = {}
        for row in edges:
            s, t = intern(row[0]), intern(row[1])
            w = float(row[2]) if len(row) > 2 and row[2] is not None else 1.0
            if not w > 0:
                raise ValueError(f"non-positive weight on edge {row[0]} -> {row[1]}")
            targets = out.setdefault(s, {})
            targets.setdefault(t, w)
        return cls._from_adjacency(urls, out)

    @classmethod
    def _from_adjacency(cls, urls, out: Mapping, origin=None) -> "LinkGraph":
        n = len(urls)
        indptr = np.zeros(n + 1, dtype=np.int64)
        indices, weights = [], []
        for i in range(n):
            targets = out.get(i, {})
            indices.extend(targets.keys())
            weights.extend(targets.values())
            indptr[i + 1] = indptr[i] + len(targets)
        return cls(urls, indptr, indices, weights, origin=origin)

    # -- basic queries ------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.urls)

    @property
    def num_edges(self) -> int:
        return int(self.indices.shape[0])

    def __repr__(self):
        return f"LinkGraph(n={self.n}, edges={self.num_edges})"

    def id_of(self, url: str) -> int:
        return self.index[url]

    def url_of(self, node: int) -> str:
        return self.urls[node]

    def _check(self, node):
        if not 0 <= node < self.n:
            raise IndexError(f"node {node} out of range for graph with {self.n} nodes")

    def out_edges(self, node: int) -> list:
        self._check(node)
        lo, hi = self.indptr[node], self.indptr[node + 1]
        return list(zip(self.indices[lo:hi].tolist(), self.weights[lo:hi].tolist()))

    def out_degree(self, node: int) -> float:
        self._check(node)
        return float(self.weights[self.indptr[node] : self.indptr[node + 1]].sum())

    def out_degrees(self) -> np.ndarray:
        return np.bincount(self.sources(), weights=self.weights, minlength=self.n)

    def sources(self) -> np.ndarray:
        return np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.indptr))

    def has_edge(self, i: int, j: int) -> bool:
        if self._edge_set is None:
            self._edge_set = set(zip(self.sources().tolist(), self.indices.tolist()))
        return (i, j) in self._edge_set

    def has_edge_url(self, a: str, b: str) -> bool:
        i, j = self.index.get(a), self.index.get(b)
        return i is not None and j is not None and self.has_edge(i, j)

    def edges(self):
        """Yield ``(source_id, target_id, weight)`` in storage order."""
        yield from zip(self.sources().tolist(), self.indices.tolist(), self.weights.tolist())

    def dangling(self) -> np.ndarray:
        return np.diff(self.indptr) == 0

    def adjacency_dense(self) -> np.ndarray:
        """``A`` with ``A[i, j]`` = weight of the link j -> i."""
        a = np.zeros((self.n, self.n))
        a[self.indices, self.sources()] = self.weights
        return a

    def cumulative_weights(self) -> np.ndarray:
        """Per-node running sums of out-edge weights, aligned with ``indices``."""
        cum = np.empty_like(self.weights)
        for i in range(self.n):
            lo, hi = self.indptr[i], self.indptr[i + 1]
            cum[lo:hi] = np.cumsum(self.weights[lo:hi])
        return cum

    def unweighted(self) -> "LinkGraph":
        if np.all(self.weights == 1.0):
            return self
        return LinkGraph(self.urls, self.indptr, self.indices, np.ones_like(self.weights), origin=self.origin)

    def relabel(self, perm) -> "LinkGraph":
        """Graph with node ``i`` renamed to ``perm[i]`` (same URLs, new order)."""
        perm = np.asarray(perm)
        inv = np.empty_like(perm)
        inv[perm] = np.arange(self.n)
        urls = [self.urls[inv[k]] for k in range(self.n)]
        out = {}
        for s, t, w in self.edges():
            out.setdefault(int(perm[s]), {})[int(perm[t])] = w
        return LinkGraph._from_adjacency(urls, out)


def out_degree(graph: LinkGraph, node: int) -> float:
    return graph.out_degree(node)


def visit_vector(graph: LinkGraph, pages: Iterable[str]) -> np.ndarray:
    """Boolean vector marking graph nodes among ``pages`` (unknown URLs ignored)."""
    v = np.zeros(graph.n, dtype=bool)
    for p in pages:
        i = graph.index.get(p)
        if i is not None:
            v[i] = True
    return v


def _count_items(counts):
    items = counts.items() if hasattr(counts, "items") else counts
    return list(items)


def induced_visited_subgraph(unweighted: LinkGraph, counts, visits) -> LinkGraph:
    """Unit-weight links plus scaled click counts, restricted to visited pages.

    ``counts`` maps ``(from_url, to_url)`` (or ``(from_id, to_id)``) to raw
    click counts; ``visits`` is a boolean vector over ``unweighted``'s ids.
    Nodes left without any incident edge are dropped and the rest re-numbered
    densely in original id order; ``origin`` maps new ids to old ones.
    """
    visits = np.asarray(visits, dtype=bool)
    if visits.shape != (unweighted.n,):
        raise ValueError("visit vector length must equal the node count")

    extra = {}
    for key, t in _count_items(counts):
        a, b = key
        i = unweighted.index.get(a) if isinstance(a, str) else int(a)
        j = unweighted.index.get(b) if isinstance(b, str) else int(b)
        if i is None or j is None or not unweighted.has_edge(i, j):
            raise ValueError(f"transition count on a non-edge: {a} -> {b}")
        extra[(i, j)] = extra.get((i, j), 0) + int(t)

    kept = {}
    touched = np.zeros(unweighted.n, dtype=bool)
    for s, t, _ in unweighted.edges():
        if visits[s] and visits[t]:
            kept.setdefault(s, {})[t] = 1.0 + sublinear_scale(extra.get((s, t), 0))
            touched[s] = touched[t] = True

    origin = np.flatnonzero(touched)
    new_id = {int(o): k for k, o in enumerate(origin)}
    out = {
        new_id[s]: {new_id[t]: w for t, w in targets.items()}
        for s, targets in kept.items()
    }
    urls = [unweighted.urls[o] for o in origin]
    return LinkGraph._from_adjacency(urls, out, origin=origin)


# --- file formats ----------------------------------------------------------


def load_edge_list(path, nodes_path=None) -> LinkGraph:
    """Read a 2- or 3-column TSV edge list (source, target[, weight])."""
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip() or line.startswith("#"):
                continue
            cols = line.rstrip("\r\n").split("\t")
            if len(cols) not in (2, 3) or not cols[0] or not cols[1]:
                raise ValueError(f"{path}:{lineno}: malformed edge row")
            if len(cols) == 3:
                try:
                    w = float(cols[2])
                except ValueError as exc:
                    raise ValueError(f"{path}:{lineno}: bad weight {cols[2]!r}") from exc
                if not (w > 0 and math.isfinite(w)):
                    raise ValueError(f"{path}:{lineno}: weight must be positive")
                rows.append((cols[0], cols[1], w))
            else:
                rows.append((cols[0], cols[1]))
    nodes = read_node_table(nodes_path) if nodes_path else None
    return LinkGraph.from_edges(rows, nodes=nodes)


def write_edge_list(path, graph: LinkGraph, weighted: bool = False) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for s, t, w in graph.edges():
            row = [graph.urls[s], graph.urls[t]]
            if weighted:
                row.append(repr(w))
            fh.write("\t".join(row) + "\n")


def write_node_table(path, graph: LinkGraph) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for i, u in enumerate(graph.urls):
            fh.write(f"{i}\t{u}\n")


def read_node_table(path) -> list:
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            cols = line.rstrip("\r\n").split("\t")
            if len(cols) != 2:
                raise ValueError(f"{path}:{lineno}: expected 2 columns")
            pairs.append((int(cols[0]), cols[1]))
    pairs.sort()
    return [u for _, u in pairs]
