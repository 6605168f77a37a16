"""Undirected simple graphs, edge-list/community file I/O and induced-degree order."""

from __future__ import annotations

import io
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

logger = logging.getLogger(__name__)

__all__ = [
    "Graph",
    "NodeOrder",
    "ParseError",
    "ParseStats",
    "parse_edge_list",
    "read_edge_list",
    "write_edge_list",
    "parse_communities",
    "read_communities",
    "write_communities",
    "induced_subgraph",
    "degree_order",
]


class ParseError(ValueError):
    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


@dataclass(frozen=True)
class ParseStats:
    self_loops: int = 0
    duplicates: int = 0


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected simple graph in CSR form over dense ids ``[0, n)``.

    ``node_ids[k]`` is the original id of dense node ``k``.
    """

    indptr: np.ndarray
    indices: np.ndarray
    node_ids: np.ndarray
    _id_index: dict = field(default=None, repr=False, compare=False)

    @classmethod
    def from_edges(cls, u, v, n=None, node_ids=None):
        """Build from endpoint arrays over dense ids; loops and duplicates are dropped."""
        u = np.asarray(u, dtype=np.int64).ravel()
        v = np.asarray(v, dtype=np.int64).ravel()
        if u.shape != v.shape:
            raise ValueError("endpoint arrays differ in length")
        if n is None:
            n = int(max(u.max(initial=-1), v.max(initial=-1)) + 1)
        if u.size and (min(u.min(), v.min()) < 0 or max(u.max(), v.max()) >= n):
            raise ValueError("endpoint outside [0, n)")
        keep = u != v
        lo, hi = np.minimum(u[keep], v[keep]), np.maximum(u[keep], v[keep])
        keys = np.unique(lo * n + hi)
        lo, hi = keys // n, keys % n
        rows = np.concatenate([lo, hi])
        cols = np.concatenate([hi, lo])
        adj = sparse.csr_array(
            (np.ones(rows.size, dtype=np.int8), (rows, cols)), shape=(n, n)
        )
        adj.sort_indices()
        if node_ids is None:
            node_ids = np.arange(n, dtype=np.int64)
        return cls(
            adj.indptr.astype(np.int64),
            adj.indices.astype(np.int64),
            np.asarray(node_ids, dtype=np.int64),
        )

    @property
    def n(self):
        return self.indptr.size - 1

    @property
    def m(self):
        return int(self.indices.size // 2)

    def degree(self):
        return np.diff(self.indptr)

    def neighbors(self, u):
        return self.indices[self.indptr[u] : self.indptr[u + 1]]

    def adjacency(self):
        data = np.ones(self.indices.size, dtype=np.int8)
        return sparse.csr_array((data, self.indices, self.indptr), shape=(self.n, self.n))

    def edges(self):
        """Each undirected edge once as ``(u, v)`` with ``u < v``, sorted."""
        u = np.repeat(np.arange(self.n, dtype=np.int64), self.degree())
        keep = u < self.indices
        return u[keep], self.indices[keep]

    def dense_ids(self, original):
        """Map original node ids to dense ids; raises KeyError on unknown ids."""
        index = self._id_index
        if index is None:
            index = {int(x): k for k, x in enumerate(self.node_ids)}
            object.__setattr__(self, "_id_index", index)
        try:
            return np.array([index[int(x)] for x in original], dtype=np.int64)
        except KeyError as err:
            raise KeyError(f"unknown node id {err.args[0]}") from None


@dataclass(frozen=True, eq=False)
class NodeOrder:
    """Community nodes listed by rank: ``nodes[r]`` is the node with rank ``r``."""

    nodes: np.ndarray

    @property
    def n_c(self):
        return self.nodes.size

    def rank(self):
        """Mapping ``{dense node id: rank}``."""
        return {int(u): r for r, u in enumerate(self.nodes)}

    def rank_of(self, nodes):
        lookup = self.rank()
        return np.array([lookup[int(u)] for u in nodes], dtype=np.int64)


def parse_edge_list(stream):
    """Parse a whitespace-separated edge list; ``#`` lines are comments.

    Returns ``(graph, stats)``.  Node ids are compacted to ``[0, n)`` in
    ascending order of their original ids.
    """
    if isinstance(stream, (bytes, bytearray)):
        stream = io.BytesIO(stream)
    us, vs = [], []
    for line_number, raw in enumerate(stream, start=1):
        line = raw.decode() if isinstance(raw, (bytes, bytearray)) else raw
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"expected two node ids, got {len(parts)} fields", line_number)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"node ids must be integers: {line!r}", line_number) from None
        if u < 0 or v < 0:
            raise ParseError(f"node ids must be non-negative: {line!r}", line_number)
        us.append(u)
        vs.append(v)
    u = np.array(us, dtype=np.int64)
    v = np.array(vs, dtype=np.int64)
    node_ids, inverse = np.unique(np.concatenate([u, v]), return_inverse=True)
    du, dv = inverse[: u.size], inverse[u.size :]
    self_loops = int(np.count_nonzero(du == dv))
    graph = Graph.from_edges(du, dv, n=node_ids.size, node_ids=node_ids)
    duplicates = int(u.size - self_loops - graph.m)
    if self_loops or duplicates:
        logger.info("dropped %d self-loops and %d duplicate edges", self_loops, duplicates)
    return graph, ParseStats(self_loops, duplicates)


def read_edge_list(path):
    with open(path, "rb") as fh:
        return parse_edge_list(fh)


def write_edge_list(graph, path_or_stream, keep_isolated=False):
    """Write one ``u v`` line per edge with original ids.

    With ``keep_isolated``, every node without edges is written as a
    self-loop line ``u u``; the parser drops the loop but keeps the node.
    """
    u, v = graph.edges()
    ids = graph.node_ids
    lines = [f"{a} {b}\n" for a, b in zip(ids[u].tolist(), ids[v].tolist())]
    if keep_isolated:
        lines.extend(f"{a} {a}\n" for a in ids[graph.degree() == 0].tolist())
    text = "".join(lines)
    if hasattr(path_or_stream, "write"):
        path_or_stream.write(text)
    else:
        with open(path_or_stream, "w") as fh:
            fh.write(text)


def parse_communities(stream, graph=None):
    """One community per line of original node ids.

    With ``graph`` given, ids are mapped to the graph's dense ids.
    """
    communities = []
    for line_number, raw in enumerate(stream, start=1):
        line = raw.decode() if isinstance(raw, (bytes, bytearray)) else raw
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            ids = [int(tok) for tok in line.split()]
        except ValueError:
            raise ParseError(f"node ids must be integers: {line!r}", line_number) from None
        if len(set(ids)) != len(ids):
            raise ParseError("community lists a node twice", line_number)
        if graph is not None:
            try:
                ids = graph.dense_ids(ids)
            except KeyError as err:
                raise ParseError(str(err.args[0]), line_number) from None
        communities.append(np.asarray(ids, dtype=np.int64))
    return communities


def read_communities(path, graph=None):
    with open(path) as fh:
        return parse_communities(fh, graph)


def write_communities(communities, path_or_stream):
    text = "".join(" ".join(str(int(u)) for u in c) + "\n" for c in communities)
    if hasattr(path_or_stream, "write"):
        path_or_stream.write(text)
    else:
        with open(path_or_stream, "w") as fh:
            fh.write(text)


def _check_nodes(graph, nodes):
    nodes = np.asarray(nodes, dtype=np.int64).ravel()
    if nodes.size and (nodes.min() < 0 or nodes.max() >= graph.n):
        bad = nodes[(nodes < 0) | (nodes >= graph.n)][0]
        raise KeyError(f"unknown node id {bad}")
    if np.unique(nodes).size != nodes.size:
        raise ValueError("node set contains duplicates")
    return nodes


def induced_subgraph(graph, nodes):
    """Subgraph on ``nodes`` (dense ids, kept in the given order)."""
    nodes = _check_nodes(graph, nodes)
    sub = graph.adjacency()[nodes][:, nodes].tocsr()
    sub.sort_indices()
    return Graph(
        sub.indptr.astype(np.int64), sub.indices.astype(np.int64), graph.node_ids[nodes]
    )


def degree_order(graph, nodes):
    """Rank nodes by non-increasing induced degree, ties by ascending original id."""
    nodes = _check_nodes(graph, nodes)
    sub = graph.adjacency()[nodes][:, nodes]
    deg = np.asarray(sub.sum(axis=1)).ravel()
    ranked = np.lexsort((graph.node_ids[nodes], -deg))
    return NodeOrder(nodes[ranked])


def local_edge_cells(graph, order):
    """Edges inside the community as rank pairs ``(row, col)`` with ``row > col``."""
    nodes = order.nodes
    sub = sparse.tril(graph.adjacency()[nodes][:, nodes], k=-1).tocoo()
    return sub.row.astype(np.int64), sub.col.astype(np.int64)
