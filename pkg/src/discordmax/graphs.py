"""Undirected weighted graphs: edge-list IO, synthetic generators, Laplacians."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp


class GraphFormatError(ValueError):
    """Malformed or invalid graph / community input."""


@dataclass
class Graph:
    """Undirected weighted graph on dense node ids 0..n-1.

    Each unordered edge is stored once as (u, v) with u < v and a strictly
    positive weight.  ``id_map`` keeps the original-label -> dense-id mapping
    when the graph came from a file with arbitrary labels.  Instances are
    treated as immutable after construction.
    """

    n: int
    edges: np.ndarray
    weights: np.ndarray
    id_map: dict[int, int] | None = None
    _adjacency: sp.csr_matrix = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 0:
            raise GraphFormatError("node count must be nonnegative")
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        weights = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        if edges.shape[0] != weights.shape[0]:
            raise GraphFormatError("edge and weight counts differ")
        if edges.size:
            if edges.min() < 0 or edges.max() >= self.n:
                raise GraphFormatError("edge endpoint out of range")
            if np.any(edges[:, 0] == edges[:, 1]):
                raise GraphFormatError("self-loops are not allowed")
            if np.any(weights <= 0.0):
                raise GraphFormatError("edge weights must be strictly positive")
        lo = np.minimum(edges[:, 0], edges[:, 1])
        hi = np.maximum(edges[:, 0], edges[:, 1])
        order = np.lexsort((hi, lo))
        edges = np.column_stack([lo, hi])[order]
        weights = weights[order]
        if edges.shape[0] > 1 and np.any(np.all(np.diff(edges, axis=0) == 0, axis=1)):
            raise GraphFormatError("duplicate edges must be merged before construction")
        self.edges = edges
        self.weights = weights
        u, v = edges[:, 0], edges[:, 1]
        data = np.concatenate([weights, weights])
        rows = np.concatenate([u, v])
        cols = np.concatenate([v, u])
        self._adjacency = sp.csr_matrix((data, (rows, cols)), shape=(self.n, self.n))

    @property
    def num_edges(self) -> int:
        return int(self.edges.shape[0])

    @property
    def adjacency(self) -> sp.csr_matrix:
        """Symmetric weighted adjacency matrix (CSR)."""
        return self._adjacency

    def weighted_degrees(self) -> np.ndarray:
        return np.asarray(self._adjacency.sum(axis=1)).ravel()

    def neighbor_counts(self) -> np.ndarray:
        return np.diff(self._adjacency.indptr)

    def neighbors(self, u: int) -> np.ndarray:
        """Neighbor ids of u in ascending order."""
        a = self._adjacency
        return a.indices[a.indptr[u]:a.indptr[u + 1]]


@dataclass
class CommunityLabels:
    """Per-node community index, contiguous from 0."""

    labels: np.ndarray

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        uniq = np.unique(labels)
        if labels.size and not np.array_equal(uniq, np.arange(uniq.size)):
            raise GraphFormatError("community labels must be contiguous from 0")
        self.labels = labels

    @property
    def n_communities(self) -> int:
        return int(self.labels.max()) + 1 if self.labels.size else 0

    def __len__(self) -> int:
        return int(self.labels.size)


@dataclass
class LaplacianView:
    """Laplacian L = D - W of a graph, with the degree and adjacency parts."""

    W: sp.csr_matrix
    degrees: np.ndarray
    L: sp.csr_matrix

    def dense(self) -> np.ndarray:
        return self.L.toarray()


def laplacian(g: Graph) -> LaplacianView:
    """Graph Laplacian L = D - W.  Row sums are zero by construction."""
    W = g.adjacency
    degrees = g.weighted_degrees()
    L = sp.diags(degrees) - W
    return LaplacianView(W=W, degrees=degrees, L=L.tocsr())


def load_edge_list(path: str | Path) -> Graph:
    """Parse a whitespace-separated edge list.

    Lines are "u v" or "u v w" with '#' starting a comment; the weight
    defaults to 1.0 and duplicate edges are merged by summing weights.
    Node labels are arbitrary nonnegative integers and get remapped to
    dense ids in ascending label order.
    """
    path = Path(path)
    accum: dict[tuple[int, int], float] = {}
    with path.open() as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) not in (2, 3):
                raise GraphFormatError(f"{path}:{lineno}: expected 'u v [w]', got {raw.strip()!r}")
            try:
                u = int(parts[0])
                v = int(parts[1])
                w = float(parts[2]) if len(parts) == 3 else 1.0
            except ValueError as exc:
                raise GraphFormatError(f"{path}:{lineno}: {exc}") from None
            if u < 0 or v < 0:
                raise GraphFormatError(f"{path}:{lineno}: node labels must be nonnegative")
            if u == v:
                raise GraphFormatError(f"{path}:{lineno}: self-loop on node {u}")
            if not np.isfinite(w) or w <= 0.0:
                raise GraphFormatError(f"{path}:{lineno}: weight must be positive, got {w}")
            key = (u, v) if u < v else (v, u)
            accum[key] = accum.get(key, 0.0) + w
    labels = sorted({u for u, _ in accum} | {v for _, v in accum})
    id_map = {lab: i for i, lab in enumerate(labels)}
    edges = np.array([[id_map[u], id_map[v]] for u, v in accum], dtype=np.int64).reshape(-1, 2)
    weights = np.array(list(accum.values()), dtype=np.float64)
    return Graph(n=len(labels), edges=edges, weights=weights, id_map=id_map)


def save_edge_list(g: Graph, path: str | Path) -> None:
    """Write "u v w" lines using dense node ids, in canonical edge order."""
    path = Path(path)
    with path.open("w", newline="\n") as fh:
        for (u, v), w in zip(g.edges, g.weights):
            fh.write(f"{int(u)} {int(v)} {float(w)!r}\n")


def load_communities(path: str | Path, n: int, id_map: dict[int, int] | None = None) -> CommunityLabels:
    """Parse "node label" lines; every node must appear exactly once."""
    path = Path(path)
    raw: dict[int, int] = {}
    with path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise GraphFormatError(f"{path}:{lineno}: expected 'node label'")
            try:
                node = int(parts[0])
                lab = int(parts[1])
            except ValueError as exc:
                raise GraphFormatError(f"{path}:{lineno}: {exc}") from None
            if id_map is not None:
                if node not in id_map:
                    raise GraphFormatError(f"{path}:{lineno}: unknown node {node}")
                node = id_map[node]
            if node < 0 or node >= n:
                raise GraphFormatError(f"{path}:{lineno}: node {node} out of range")
            if node in raw:
                raise GraphFormatError(f"{path}:{lineno}: duplicate entry for node {node}")
            raw[node] = lab
    if len(raw) != n:
        raise GraphFormatError(f"{path}: {len(raw)} labeled nodes, expected {n}")
    labels = np.array([raw[i] for i in range(n)], dtype=np.int64)
    # remap to contiguous 0..K-1 in ascending label order
    uniq = np.unique(labels)
    remap = {int(lab): i for i, lab in enumerate(uniq)}
    labels = np.array([remap[int(lab)] for lab in labels], dtype=np.int64)
    return CommunityLabels(labels)


def save_communities(labels: CommunityLabels, path: str | Path) -> None:
    path = Path(path)
    with path.open("w", newline="\n") as fh:
        for node, lab in enumerate(labels.labels):
            fh.write(f"{node} {lab}\n")


def generate_sbm(sizes: list[int], p_intra: float, p_inter: float, seed: int) -> tuple[Graph, CommunityLabels]:
    """Stochastic block model with unit edge weights.

    Every intra-community pair is joined independently with p_intra and
    every inter-community pair with p_inter.  The draw order is fixed by
    block index, so a given (sizes, p_intra, p_inter, seed) always yields
    the same edge set.
    """
    if not sizes or any(s <= 0 for s in sizes):
        raise GraphFormatError("community sizes must be positive")
    for name, p in (("p_intra", p_intra), ("p_inter", p_inter)):
        if not 0.0 <= p <= 1.0:
            raise GraphFormatError(f"{name} must lie in [0, 1], got {p}")
    rng = np.random.default_rng(seed)
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    n = int(offsets[-1])
    blocks = len(sizes)
    chunks = []
    for a in range(blocks):
        for b in range(a, blocks):
            p = p_intra if a == b else p_inter
            if a == b:
                iu, ju = np.triu_indices(sizes[a], k=1)
                keep = rng.random(iu.size) < p
                if keep.any():
                    chunks.append(np.column_stack([iu[keep] + offsets[a], ju[keep] + offsets[a]]))
            else:
                keep = rng.random(sizes[a] * sizes[b]) < p
                if keep.any():
                    ia, jb = np.nonzero(keep.reshape(sizes[a], sizes[b]))
                    chunks.append(np.column_stack([ia + offsets[a], jb + offsets[b]]))
    if chunks:
        edges = np.concatenate(chunks, axis=0)
    else:
        edges = np.empty((0, 2), dtype=np.int64)
    labels = np.repeat(np.arange(blocks, dtype=np.int64), sizes)
    return Graph(n=n, edges=edges, weights=np.ones(edges.shape[0])), CommunityLabels(labels)


def bfs_subsample(g: Graph, target_n: int, seed: int) -> Graph:
    """Induced subgraph on the first target_n nodes reached by BFS.

    The BFS starts from a uniformly random node and visits neighbors in
    ascending id order.  If a component is exhausted before target_n nodes
    are found, the search restarts from a random unvisited node.
    """
    if target_n <= 0:
        raise GraphFormatError("target_n must be positive")
    if g.n == 0:
        raise GraphFormatError("cannot subsample an empty graph")
    if target_n > g.n:
        raise GraphFormatError(f"target_n={target_n} exceeds graph size {g.n}")
    rng = np.random.default_rng(seed)
    visited = np.zeros(g.n, dtype=bool)
    order: list[int] = []
    from collections import deque

    queue: deque[int] = deque()
    while len(order) < target_n:
        if not queue:
            unvisited = np.flatnonzero(~visited)
            start = int(unvisited[rng.integers(unvisited.size)])
            visited[start] = True
            order.append(start)
            queue.append(start)
            if len(order) >= target_n:
                break
            continue
        u = queue.popleft()
        for v in g.neighbors(u):
            if not visited[v]:
                visited[v] = True
                order.append(int(v))
                queue.append(int(v))
                if len(order) >= target_n:
                    break
        if len(order) >= target_n:
            break
    keep = sorted(order[:target_n])
    new_id = np.full(g.n, -1, dtype=np.int64)
    for i, node in enumerate(keep):
        new_id[node] = i
    mask = (new_id[g.edges[:, 0]] >= 0) & (new_id[g.edges[:, 1]] >= 0)
    edges = new_id[g.edges[mask]]
    return Graph(n=target_n, edges=edges, weights=g.weights[mask],
                 id_map={int(node): int(i) for i, node in enumerate(keep)})
