"""Undirected graphs, edge-list/label file I/O and synthetic constructions."""

from __future__ import annotations

from dataclasses import dataclass
from os import PathLike
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


class GraphFormatError(ValueError):
    """Malformed edge-list or label file."""


Edge = tuple[int, int]


def _canonical_edges(edges: Iterable[Sequence[int]]) -> tuple[Edge, ...]:
    out = set()
    for u, v in edges:
        u, v = int(u), int(v)
        out.add((u, v) if u < v else (v, u))
    return tuple(sorted(out))


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on nodes ``0..n-1``.

    ``edges`` is stored canonically: each pair as ``(u, v)`` with ``u < v``,
    sorted, without duplicates. Use :meth:`from_edges` to build one from
    arbitrary (possibly reversed or repeated) pairs.
    """

    n: int
    edges: tuple[Edge, ...]
    labels: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"graph needs at least one node, got n={self.n}")
        prev = None
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"self-loop on node {u}")
            if not (0 <= u < v < self.n):
                raise ValueError(f"edge ({u}, {v}) is not canonical or out of range for n={self.n}")
            if prev is not None and (u, v) <= prev:
                raise ValueError("edges must be sorted and unique; use Graph.from_edges")
            prev = (u, v)
        if self.labels is not None:
            if len(self.labels) != self.n:
                raise ValueError(f"{len(self.labels)} labels for {self.n} nodes")
            if any(y < 0 for y in self.labels):
                raise ValueError("labels must be nonnegative integers")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]], labels=None) -> "Graph":
        edges = _canonical_edges(edges)
        if labels is not None:
            labels = tuple(int(y) for y in labels)
        return cls(n=n, edges=edges, labels=labels)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def is_labeled(self) -> bool:
        return self.labels is not None

    def with_labels(self, labels: Sequence[int]) -> "Graph":
        return Graph(n=self.n, edges=self.edges, labels=tuple(int(y) for y in labels))

    def edge_array(self) -> np.ndarray:
        """Edges as an ``(m, 2)`` integer array."""
        return np.array(self.edges, dtype=np.int64).reshape(-1, 2)

    def adjacency(self) -> np.ndarray:
        """Dense symmetric 0/1 adjacency matrix."""
        A = np.zeros((self.n, self.n))
        e = self.edge_array()
        A[e[:, 0], e[:, 1]] = 1.0
        A[e[:, 1], e[:, 0]] = 1.0
        return A

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        e = self.edge_array()
        np.add.at(deg, e[:, 0], 1)
        np.add.at(deg, e[:, 1], 1)
        return deg

    def degree_profile(self) -> "DegreeProfile":
        return DegreeProfile(degrees=self.degrees(), mean_degree=2.0 * self.num_edges / self.n)

    def label_array(self) -> np.ndarray:
        if self.labels is None:
            raise ValueError("graph is unlabeled")
        return np.asarray(self.labels, dtype=np.int64)

    def one_hot_labels(self) -> np.ndarray:
        """``(n, k)`` one-hot label matrix, one column per distinct class id (ascending)."""
        y = self.label_array()
        classes, inv = np.unique(y, return_inverse=True)
        Y = np.zeros((self.n, len(classes)))
        Y[np.arange(self.n), inv] = 1.0
        return Y

    def connected_components(self) -> int:
        parent = list(range(self.n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for u, v in self.edges:
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[ru] = rv
        return len({find(i) for i in range(self.n)})


@dataclass(frozen=True)
class DegreeProfile:
    degrees: np.ndarray
    mean_degree: float


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------


def _data_lines(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            yield lineno, line


def _parse_pair(lineno: int, line: str, what: str) -> tuple[int, int]:
    parts = line.split()
    if len(parts) != 2:
        raise GraphFormatError(f"line {lineno}: expected two integers ({what}), got {line!r}")
    try:
        a, b = int(parts[0]), int(parts[1])
    except ValueError:
        raise GraphFormatError(f"line {lineno}: non-integer token in {line!r}") from None
    if a < 0 or b < 0:
        raise GraphFormatError(f"line {lineno}: negative id in {line!r}")
    return a, b


def load_edge_list(path: str | PathLike, n_hint: int | None = None) -> Graph:
    """Read a whitespace-separated ``u v`` edge list.

    Lines starting with ``#`` and blank lines are skipped. Reversed and
    repeated pairs collapse to a single undirected edge. The node count is
    ``max id + 1``, or ``n_hint`` when that is larger.
    """
    edges = []
    max_id = -1
    for lineno, line in _data_lines(path):
        u, v = _parse_pair(lineno, line, "u v")
        if u == v:
            raise GraphFormatError(f"self-loop at line {lineno}: node {u}")
        edges.append((u, v))
        max_id = max(max_id, u, v)
    n = max_id + 1
    if n_hint is not None:
        n = max(n, int(n_hint))
    if n < 1:
        raise GraphFormatError(f"{path}: no edges and no node count given")
    return Graph.from_edges(n, edges)


def save_edge_list(graph: Graph, path: str | PathLike) -> None:
    lines = [f"# nodes {graph.n} edges {graph.num_edges}"]
    lines += [f"{u} {v}" for u, v in graph.edges]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_labels(path: str | PathLike, graph: Graph) -> Graph:
    """Attach ``node_id label_id`` labels; every node must be labeled exactly once."""
    labels: dict[int, int] = {}
    for lineno, line in _data_lines(path):
        node, label = _parse_pair(lineno, line, "node_id label_id")
        if node >= graph.n:
            raise GraphFormatError(f"line {lineno}: unknown node {node} (graph has {graph.n} nodes)")
        if node in labels and labels[node] != label:
            raise GraphFormatError(f"line {lineno}: node {node} relabeled {labels[node]} -> {label}")
        labels[node] = label
    missing = [i for i in range(graph.n) if i not in labels]
    if missing:
        shown = ", ".join(map(str, missing[:5])) + (" ..." if len(missing) > 5 else "")
        raise GraphFormatError(f"node {shown} unlabeled")
    return graph.with_labels([labels[i] for i in range(graph.n)])


def save_labels(graph: Graph, path: str | PathLike) -> None:
    y = graph.label_array()
    Path(path).write_text("".join(f"{i} {int(c)}\n" for i, c in enumerate(y)), encoding="utf-8")


# ---------------------------------------------------------------------------
# Synthetic graphs
# ---------------------------------------------------------------------------


def cycle_block_graph(n_blocks: int, block_size: int) -> Graph:
    """Disjoint union of ``n_blocks`` cycles of length ``block_size``.

    Block ``k`` occupies ids ``[k*block_size, (k+1)*block_size)`` and every
    node in it carries label ``k``.
    """
    if n_blocks < 1:
        raise ValueError("n_blocks must be >= 1")
    if block_size < 3:
        raise ValueError("block_size must be >= 3 for a simple cycle")
    edges = []
    for k in range(n_blocks):
        base = k * block_size
        for i in range(block_size):
            edges.append((base + i, base + (i + 1) % block_size))
    labels = [k for k in range(n_blocks) for _ in range(block_size)]
    return Graph.from_edges(n_blocks * block_size, edges, labels)


def homophily_ratio(graph: Graph) -> float:
    """Fraction of edges whose endpoints share a label."""
    if graph.num_edges == 0:
        raise ValueError("homophily ratio undefined for an edgeless graph")
    y = graph.label_array()
    e = graph.edge_array()
    return float(np.count_nonzero(y[e[:, 0]] == y[e[:, 1]]) / len(e))


def neighbourhood_label_distribution(graph: Graph) -> np.ndarray:
    """Row ``k``: average over class-``k`` nodes of their neighbour label histogram.

    Nodes without neighbours are skipped. Rows of classes with no
    non-isolated member are zero. Columns index class ids ``0..max label``.
    """
    y = graph.label_array()
    n_classes = int(y.max()) + 1
    A = graph.adjacency()
    deg = A.sum(axis=1)
    Y = np.zeros((graph.n, n_classes))
    Y[np.arange(graph.n), y] = 1.0
    hist = A @ Y
    dist = np.zeros((n_classes, n_classes))
    for k in range(n_classes):
        members = (y == k) & (deg > 0)
        if members.any():
            dist[k] = (hist[members] / deg[members, None]).mean(axis=0)
    return dist


def heterophilic_perturbation(graph: Graph, n_new_edges: int, rng_seed: int) -> Graph:
    """Add ``n_new_edges`` label-aware heterophilic edges.

    For each new edge a source node ``i`` is drawn uniformly (with
    replacement across edges). A target class ``c != y_i`` is drawn from the
    average neighbourhood label distribution of class ``y_i`` with the own
    class removed and the rest renormalized; when that leaves no mass the
    target class is uniform over the other classes. The partner ``j`` is
    uniform among class-``c`` nodes not yet adjacent to ``i``. Draws that hit
    an existing edge are retried, at most ``n**2`` times in total.
    """
    if not graph.is_labeled:
        raise ValueError("heterophilic perturbation needs a labeled graph")
    if n_new_edges < 0:
        raise ValueError("n_new_edges must be nonnegative")
    if n_new_edges == 0:
        return graph

    y = graph.label_array()
    n = graph.n
    classes = np.unique(y)
    members = {int(k): np.flatnonzero(y == k) for k in classes}

    A = graph.adjacency().astype(bool)
    hetero_pairs = np.count_nonzero(np.triu(~A & (y[:, None] != y[None, :]), k=1))
    if hetero_pairs < n_new_edges:
        raise ValueError(
            f"only {hetero_pairs} absent heterophilic pairs, cannot add {n_new_edges} edges"
        )

    dist = neighbourhood_label_distribution(graph)
    target_probs = {}
    for k in classes:
        p = dist[int(k), classes].copy()
        p[classes == k] = 0.0
        if p.sum() <= 0:
            p = (classes != k).astype(float)
        target_probs[int(k)] = p / p.sum()

    rng = np.random.default_rng(rng_seed)
    new_edges = []
    budget = n * n
    while len(new_edges) < n_new_edges:
        if budget <= 0:
            raise RuntimeError(
                f"gave up after {n * n} draws with {len(new_edges)}/{n_new_edges} edges placed"
            )
        budget -= 1
        i = int(rng.integers(n))
        target = int(classes[rng.choice(len(classes), p=target_probs[int(y[i])])])
        free = members[target][~A[i, members[target]]]
        if free.size == 0:
            continue
        j = int(free[rng.integers(free.size)])
        A[i, j] = A[j, i] = True
        new_edges.append((i, j))

    return Graph.from_edges(n, list(graph.edges) + new_edges, graph.labels)
