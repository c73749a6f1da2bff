"""Hybrid human/AI graph storage, partitions and the Louvain aggregation step.

Graphs are immutable CSR structures.  Every node has an external id
(``node_ids``, ascending) and a dense position ``0..n-1`` used by the kernels;
the two coincide for freshly built graphs and drift apart once nodes are
removed.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np


class GraphError(ValueError):
    """Raised for malformed graphs, unknown nodes and invalid partitions."""


class NodeKind(enum.Enum):
    HUMAN = "H"
    AI = "A"

    @classmethod
    def parse(cls, value) -> "NodeKind":
        if isinstance(value, NodeKind):
            return value
        if isinstance(value, (bool, np.bool_)):
            return cls.AI if value else cls.HUMAN
        text = str(value).strip().upper()
        if text in ("H", "HUMAN"):
            return cls.HUMAN
        if text in ("A", "AI"):
            return cls.AI
        raise GraphError(f"unknown node kind {value!r}")


def _csr(n: int, u: np.ndarray, v: np.ndarray, w: np.ndarray):
    """Symmetric CSR from one-sided edge arrays; rows sorted by neighbour."""
    rows = np.concatenate([u, v])
    cols = np.concatenate([v, u])
    vals = np.concatenate([w, w]).astype(np.float64)
    order = np.lexsort((cols, rows))
    rows, cols, vals = rows[order], cols[order], vals[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
    return indptr, cols.astype(np.int64), vals


@dataclass(frozen=True, eq=False)
class HasnGraph:
    node_ids: np.ndarray
    is_ai: np.ndarray
    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray
    self_loops: np.ndarray
    humans: np.ndarray
    ais: np.ndarray

    @classmethod
    def from_arrays(cls, node_ids, is_ai, u, v, w=None, *, self_loops=None,
                    humans=None, ais=None) -> "HasnGraph":
        """Build from positional edge arrays (no validation beyond shapes).

        ``u``/``v`` are positions into ``node_ids``; every undirected edge must
        appear exactly once.
        """
        node_ids = np.asarray(node_ids, dtype=np.int64)
        is_ai = np.asarray(is_ai, dtype=bool)
        n = len(node_ids)
        u = np.asarray(u, dtype=np.int64)
        v = np.asarray(v, dtype=np.int64)
        w = np.ones(len(u)) if w is None else np.asarray(w, dtype=np.float64)
        indptr, indices, weights = _csr(n, u, v, w)
        if self_loops is None:
            self_loops = np.zeros(n)
        if humans is None:
            humans = (~is_ai).astype(np.int64)
        if ais is None:
            ais = is_ai.astype(np.int64)
        return cls(node_ids, is_ai, indptr, indices, weights,
                   np.asarray(self_loops, dtype=np.float64),
                   np.asarray(humans, dtype=np.int64),
                   np.asarray(ais, dtype=np.int64))

    # -- sizes ---------------------------------------------------------------
    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    def __len__(self) -> int:
        return self.n_nodes

    @property
    def edge_count(self) -> int:
        """Undirected edges, self-loops included."""
        return len(self.indices) // 2 + int(np.count_nonzero(self.self_loops))

    @cached_property
    def degrees(self) -> np.ndarray:
        """Weighted degree per position; a self-loop counts twice."""
        rows = np.repeat(np.arange(self.n_nodes), np.diff(self.indptr))
        deg = np.bincount(rows, weights=self.weights, minlength=self.n_nodes)
        return deg.astype(np.float64) + 2.0 * self.self_loops

    @property
    def total_weight(self) -> float:
        """Sum of degrees, i.e. ``2|E|`` for unit weights."""
        return float(self.degrees.sum())

    @property
    def human_count(self) -> int:
        return int(self.humans.sum())

    @property
    def ai_count(self) -> int:
        return int(self.ais.sum())

    @property
    def ai_ids(self) -> np.ndarray:
        return self.node_ids[self.is_ai]

    @property
    def human_ids(self) -> np.ndarray:
        return self.node_ids[~self.is_ai]

    # -- lookup --------------------------------------------------------------
    def index_of(self, node) -> int:
        pos = int(np.searchsorted(self.node_ids, node))
        if pos >= self.n_nodes or self.node_ids[pos] != node:
            raise GraphError(f"node {node} is not in the graph")
        return pos

    def positions(self, nodes) -> np.ndarray:
        nodes = np.asarray(nodes, dtype=np.int64).ravel()
        if self.n_nodes == 0:
            if len(nodes):
                raise GraphError(f"node {int(nodes[0])} is not in the graph")
            return nodes
        pos = np.searchsorted(self.node_ids, nodes)
        bad = (pos >= self.n_nodes) | (self.node_ids[np.minimum(pos, self.n_nodes - 1)] != nodes)
        if np.any(bad):
            raise GraphError(f"node {int(nodes[np.argmax(bad)])} is not in the graph")
        return pos

    def kind(self, node) -> NodeKind:
        return NodeKind.AI if self.is_ai[self.index_of(node)] else NodeKind.HUMAN

    def neighbors(self, node) -> np.ndarray:
        i = self.index_of(node)
        return self.node_ids[self.indices[self.indptr[i]:self.indptr[i + 1]]]

    def degree(self, node) -> float:
        return float(self.degrees[self.index_of(node)])

    def edge_arrays(self):
        """Positional ``(u, v, w)`` with ``u < v``, each edge once."""
        rows = np.repeat(np.arange(self.n_nodes), np.diff(self.indptr))
        keep = rows < self.indices
        return rows[keep], self.indices[keep], self.weights[keep]

    def edges(self):
        """``(u_id, v_id, weight)`` triples with ``u_id < v_id``, sorted."""
        u, v, w = self.edge_arrays()
        return [(int(self.node_ids[a]), int(self.node_ids[b]), float(x)) for a, b, x in zip(u, v, w)]

    def has_edge(self, a, b) -> bool:
        i, j = self.index_of(a), self.index_of(b)
        row = self.indices[self.indptr[i]:self.indptr[i + 1]]
        k = np.searchsorted(row, j)
        return bool(k < len(row) and row[k] == j)

    def with_weights(self, weights: np.ndarray) -> "HasnGraph":
        weights = np.asarray(weights, dtype=np.float64)
        if weights.shape != self.weights.shape:
            raise GraphError("weight array does not match the edge layout")
        return HasnGraph(self.node_ids, self.is_ai, self.indptr, self.indices, weights,
                         self.self_loops, self.humans, self.ais)

    def __eq__(self, other) -> bool:
        if not isinstance(other, HasnGraph):
            return NotImplemented
        return all(np.array_equal(getattr(self, f), getattr(other, f)) for f in (
            "node_ids", "is_ai", "indptr", "indices", "weights", "self_loops", "humans", "ais"))

    __hash__ = None

    def __repr__(self) -> str:
        return (f"HasnGraph(|V|={self.n_nodes}, |E|={self.edge_count}, "
                f"|H|={self.human_count}, |AI|={self.ai_count})")


def build_graph(edges: Iterable, kinds: Mapping) -> HasnGraph:
    """Validated construction from ``(u, v, weight)`` triples and a kind map.

    Weight may be omitted (``(u, v)`` pairs mean unit weight).  Duplicate
    undirected edges, self-loops, unknown ids and non-positive weights are
    rejected.
    """
    ids = sorted(int(k) for k in kinds)
    if any(i < 0 for i in ids):
        raise GraphError("node ids must be non-negative integers")
    node_ids = np.asarray(ids, dtype=np.int64)
    is_ai = np.array([NodeKind.parse(kinds[i]) is NodeKind.AI for i in ids], dtype=bool)
    where = {i: p for p, i in enumerate(ids)}
    us, vs, ws, seen = [], [], [], set()
    for e in edges:
        a, b = int(e[0]), int(e[1])
        w = float(e[2]) if len(e) > 2 else 1.0
        for node in (a, b):
            if node not in where:
                raise GraphError(f"edge ({a}, {b}) references unknown node {node}")
        if a == b:
            raise GraphError(f"self-loop on node {a}")
        if not w > 0 or not np.isfinite(w):
            raise GraphError(f"edge ({a}, {b}) has non-positive weight {w}")
        key = (min(a, b), max(a, b))
        if key in seen:
            raise GraphError(f"duplicate edge {key}")
        seen.add(key)
        us.append(where[a])
        vs.append(where[b])
        ws.append(w)
    return HasnGraph.from_arrays(node_ids, is_ai, us, vs, ws)


def remove_nodes(g: HasnGraph, nodes) -> HasnGraph:
    """Drop the given node ids and every incident edge."""
    drop = np.zeros(g.n_nodes, dtype=bool)
    drop[g.positions(np.atleast_1d(nodes))] = True
    keep = ~drop
    new_pos = np.cumsum(keep) - 1
    u, v, w = g.edge_arrays()
    ok = keep[u] & keep[v]
    return HasnGraph.from_arrays(g.node_ids[keep], g.is_ai[keep], new_pos[u[ok]], new_pos[v[ok]],
                                 w[ok], self_loops=g.self_loops[keep], humans=g.humans[keep],
                                 ais=g.ais[keep])


def remove_node(g: HasnGraph, v) -> HasnGraph:
    g.index_of(v)
    return remove_nodes(g, [v])


def induced_subgraph(g: HasnGraph, nodes) -> HasnGraph:
    keep = np.zeros(g.n_nodes, dtype=bool)
    keep[g.positions(np.atleast_1d(nodes))] = True
    return remove_nodes(g, g.node_ids[~keep]) if not keep.all() else g


def add_edges(g: HasnGraph, u, v, w=None) -> HasnGraph:
    """New graph with extra positional edges (caller guarantees they are new)."""
    u0, v0, w0 = g.edge_arrays()
    u = np.asarray(u, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    w = np.ones(len(u)) if w is None else np.asarray(w, dtype=np.float64)
    return HasnGraph.from_arrays(g.node_ids, g.is_ai, np.concatenate([u0, u]),
                                 np.concatenate([v0, v]), np.concatenate([w0, w]),
                                 self_loops=g.self_loops, humans=g.humans, ais=g.ais)


# -- partitions ---------------------------------------------------------------

def canonical_labels(labels) -> np.ndarray:
    """Relabel to ``0..K-1`` in order of first appearance."""
    labels = np.asarray(labels)
    if len(labels) == 0:
        return np.zeros(0, dtype=np.int64)
    _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(len(first))
    return rank[inverse.ravel()]


@dataclass(frozen=True, eq=False)
class Partition:
    """Disjoint communities over a set of node ids (canonically labelled)."""

    node_ids: np.ndarray
    membership: np.ndarray

    @classmethod
    def from_labels(cls, node_ids, labels) -> "Partition":
        node_ids = np.asarray(node_ids, dtype=np.int64)
        labels = np.asarray(labels)
        if node_ids.shape != labels.shape:
            raise GraphError("node ids and labels differ in length")
        order = np.argsort(node_ids, kind="stable")
        node_ids, labels = node_ids[order], labels[order]
        if len(node_ids) > 1 and np.any(np.diff(node_ids) == 0):
            raise GraphError("partition lists a node twice")
        return cls(node_ids, canonical_labels(labels))

    @classmethod
    def from_mapping(cls, mapping: Mapping) -> "Partition":
        items = sorted((int(k), v) for k, v in mapping.items())
        return cls.from_labels([k for k, _ in items], [v for _, v in items])

    @classmethod
    def from_communities(cls, communities) -> "Partition":
        ids, labels = [], []
        for c, members in enumerate(communities):
            for m in members:
                ids.append(int(m))
                labels.append(c)
        return cls.from_labels(ids, labels)

    @classmethod
    def singletons(cls, g: HasnGraph) -> "Partition":
        return cls(g.node_ids.copy(), np.arange(g.n_nodes, dtype=np.int64))

    @property
    def n_communities(self) -> int:
        return int(self.membership.max()) + 1 if len(self.membership) else 0

    def __len__(self) -> int:
        return len(self.node_ids)

    def community_of(self, node) -> int:
        pos = int(np.searchsorted(self.node_ids, node))
        if pos >= len(self.node_ids) or self.node_ids[pos] != node:
            raise GraphError(f"node {node} is not in the partition")
        return int(self.membership[pos])

    def communities(self) -> list[np.ndarray]:
        order = np.argsort(self.membership, kind="stable")
        bounds = np.cumsum(np.bincount(self.membership, minlength=self.n_communities))[:-1]
        return np.split(self.node_ids[order], bounds)

    def as_dict(self) -> dict[int, int]:
        return {int(n): int(c) for n, c in zip(self.node_ids, self.membership)}

    def restrict(self, nodes) -> "Partition":
        keep = np.isin(self.node_ids, np.asarray(nodes, dtype=np.int64))
        return Partition.from_labels(self.node_ids[keep], self.membership[keep])

    def __eq__(self, other) -> bool:
        if not isinstance(other, Partition):
            return NotImplemented
        return np.array_equal(self.node_ids, other.node_ids) and \
            np.array_equal(self.membership, other.membership)

    __hash__ = None

    def __repr__(self) -> str:
        return f"Partition(nodes={len(self)}, K={self.n_communities})"


def membership_for(g: HasnGraph, p: Partition) -> np.ndarray:
    """Community label per graph position; the partition must cover ``g`` exactly."""
    if not np.array_equal(g.node_ids, p.node_ids):
        raise GraphError("partition does not cover exactly the graph's node set")
    return p.membership


@dataclass(frozen=True)
class CommunityStats:
    humans: np.ndarray
    ais: np.ndarray
    sigma_in: np.ndarray   # internal weight, each edge once, self-loops included
    sigma_tot: np.ndarray  # sum of member degrees

    @property
    def size(self) -> np.ndarray:
        return self.humans + self.ais

    @property
    def k(self) -> int:
        return len(self.humans)


def stats_from_labels(g: HasnGraph, labels: np.ndarray, n_comm: int | None = None) -> CommunityStats:
    labels = np.asarray(labels, dtype=np.int64)
    n_comm = (int(labels.max()) + 1 if len(labels) else 0) if n_comm is None else n_comm
    u, v, w = g.edge_arrays()
    same = labels[u] == labels[v]
    sigma_in = np.bincount(labels[u[same]], weights=w[same], minlength=n_comm) \
        + np.bincount(labels, weights=g.self_loops, minlength=n_comm)
    return CommunityStats(
        humans=np.bincount(labels, weights=g.humans, minlength=n_comm).astype(np.int64),
        ais=np.bincount(labels, weights=g.ais, minlength=n_comm).astype(np.int64),
        sigma_in=sigma_in.astype(np.float64),
        sigma_tot=np.bincount(labels, weights=g.degrees, minlength=n_comm).astype(np.float64),
    )


def community_stats(g: HasnGraph, p: Partition) -> CommunityStats:
    return stats_from_labels(g, membership_for(g, p), p.n_communities)


def aggregate_labels(g: HasnGraph, labels: np.ndarray) -> HasnGraph:
    """Collapse each community (labels ``0..K-1``) into one super-node."""
    labels = np.asarray(labels, dtype=np.int64)
    k = int(labels.max()) + 1 if len(labels) else 0
    u, v, w = g.edge_arrays()
    cu, cv = labels[u], labels[v]
    same = cu == cv
    loops = np.bincount(labels, weights=g.self_loops, minlength=k) \
        + np.bincount(cu[same], weights=w[same], minlength=k)
    a = np.minimum(cu[~same], cv[~same])
    b = np.maximum(cu[~same], cv[~same])
    keys, inverse = np.unique(a * k + b, return_inverse=True)
    summed = np.bincount(inverse.ravel(), weights=w[~same], minlength=len(keys))
    humans = np.bincount(labels, weights=g.humans, minlength=k).astype(np.int64)
    ais = np.bincount(labels, weights=g.ais, minlength=k).astype(np.int64)
    return HasnGraph.from_arrays(np.arange(k), humans == 0, keys // k, keys % k, summed,
                                 self_loops=loops, humans=humans, ais=ais)


def aggregate(g: HasnGraph, p: Partition) -> HasnGraph:
    """Super-node graph: node ``c`` stands for community ``c`` of ``p``.

    Intra-community weight becomes a self-loop, inter-community weight is
    summed into single edges, and member human/AI counts ride along so the
    composition of every community stays known at coarser levels.
    """
    return aggregate_labels(g, membership_for(g, p))
