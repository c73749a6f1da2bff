"""AI scoring: edge reweighting by endpoint kind and the per-AI humanoid score.

The score combines eigenvector centrality, betweenness centrality and one
minus the clustering coefficient, each min-max normalised over the AI nodes.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from ._accel import jit
from .graph import GraphError, HasnGraph

EC_TOL = 1e-8
EC_MAX_ITER = 1000
_MAX_LCM = 1 << 40  # integer distances stay exact well below 2**53
_MAX_BUCKET_SPAN = 4096


@dataclass(frozen=True)
class EdgeWeightPolicy:
    """Weights for human-human, human-AI and AI-AI edges."""

    hh: float = 3.0
    ha: float = 2.0
    aa: float = 1.0

    def __post_init__(self):
        for name in ("hh", "ha", "aa"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} weight must be positive, got {value!r}")

    @classmethod
    def parse(cls, text: str) -> "EdgeWeightPolicy":
        parts = [p for p in str(text).replace(" ", "").split(",") if p]
        if len(parts) != 3:
            raise ValueError(f"expected 'hh,ha,aa', got {text!r}")
        return cls(*(float(p) for p in parts))

    def as_tuple(self) -> tuple[float, float, float]:
        return self.hh, self.ha, self.aa


class ScoringMode(enum.Enum):
    EC = "ec"
    BC = "bc"
    CC = "cc"
    EC_BC = "ec+bc"
    EC_CC = "ec+cc"
    BC_CC = "bc+cc"
    ALL = "all"

    @classmethod
    def parse(cls, value) -> "ScoringMode":
        if isinstance(value, ScoringMode):
            return value
        text = str(value).strip().lower().replace("_", "+")
        if text in ("all", "ec+bc+cc"):
            return cls.ALL
        for mode in cls:
            if mode.value == text:
                return mode
        raise ValueError(f"unknown scoring mode {value!r}")

    @property
    def measures(self) -> tuple[str, ...]:
        if self is ScoringMode.ALL:
            return ("ec", "bc", "cc")
        return tuple(self.value.split("+"))


@dataclass(frozen=True)
class HumanoidScore:
    node: int
    ec: float
    bc: float
    cc: float
    combined: float


def reweight_edges(g: HasnGraph, policy: EdgeWeightPolicy | None = None) -> HasnGraph:
    """Set each edge weight from the kinds of its endpoints; topology unchanged."""
    policy = EdgeWeightPolicy() if policy is None else policy
    rows = np.repeat(np.arange(g.n_nodes), np.diff(g.indptr))
    n_ai = g.is_ai[rows].astype(np.int64) + g.is_ai[g.indices]
    table = np.array([policy.hh, policy.ha, policy.aa])
    return g.with_weights(table[n_ai])


# -- eigenvector centrality ---------------------------------------------------

@jit
def _ec_kernel(indptr, indices, weights, tol, max_iter):
    n = indptr.shape[0] - 1
    x = np.full(n, 1.0 / math.sqrt(n))
    y = np.empty(n)
    for it in range(max_iter):
        # (A + I) x keeps bipartite graphs from oscillating
        norm = 0.0
        for i in range(n):
            s = x[i]
            for e in range(indptr[i], indptr[i + 1]):
                s += weights[e] * x[indices[e]]
            y[i] = s
            norm += s * s
        norm = math.sqrt(norm)
        if norm == 0.0:
            return x, it
        change = 0.0
        for i in range(n):
            v = y[i] / norm
            d = abs(v - x[i])
            if d > change:
                change = d
            x[i] = v
        if change < tol:
            return x, it + 1
    return x, max_iter


def eigenvector_centrality(g: HasnGraph, tol: float = EC_TOL, max_iter: int = EC_MAX_ITER) -> np.ndarray:
    """Power iteration on the weighted adjacency, L2-normalised, one value per position.

    Iterates on ``A + I``, which has the same dominant eigenvector as ``A``
    on connected graphs but also converges on bipartite ones.  Disconnected
    graphs are handled in one pass from the uniform start vector.
    """
    if g.n_nodes == 0:
        raise GraphError("eigenvector centrality of an empty graph")
    x, _ = _ec_kernel(g.indptr, g.indices, g.weights, float(tol), int(max_iter))
    return x


# -- betweenness centrality ---------------------------------------------------

@jit
def _heap_push(keys, vals, size, key, val):
    i = size
    while i > 0:
        parent = (i - 1) >> 1
        if keys[parent] <= key:
            break
        keys[i] = keys[parent]
        vals[i] = vals[parent]
        i = parent
    keys[i] = key
    vals[i] = val
    return size + 1


@jit
def _heap_pop(keys, vals, size):
    key = keys[0]
    val = vals[0]
    size -= 1
    last_k = keys[size]
    last_v = vals[size]
    i = 0
    while True:
        c = 2 * i + 1
        if c >= size:
            break
        if c + 1 < size and keys[c + 1] < keys[c]:
            c += 1
        if last_k <= keys[c]:
            break
        keys[i] = keys[c]
        vals[i] = vals[c]
        i = c
    keys[i] = last_k
    vals[i] = last_v
    return key, val, size


@jit
def _same(a, b, tol):
    if tol == 0.0:
        return a == b
    if math.isinf(b):
        return False
    return abs(a - b) <= tol * max(1.0, abs(b))


@jit
def _brandes_buckets(indptr, indices, lengths, span):
    # Dial's algorithm over integer lengths in 1..span-1 with circular buckets;
    # path counts are accumulated while settling, as every predecessor of a
    # node is settled before it.  Predecessors go into the node's own CSR slots
    # (there are at most deg(w) of them) so the backward pass skips slack edges.
    n = indptr.shape[0] - 1
    bc = np.zeros(n)
    dist = np.empty(n, np.int64)
    sigma = np.empty(n)
    delta = np.empty(n)
    order = np.empty(n, np.int64)
    npred = np.zeros(n, np.int64)
    pred = np.empty(indices.shape[0], np.int64)
    cap = indices.shape[0] + 1
    head = np.empty(span, np.int64)
    nxt = np.empty(cap, np.int64)
    item = np.empty(cap, np.int64)
    unreached = np.iinfo(np.int64).max
    dist[:] = unreached
    for s in range(n):
        head[:] = -1
        dist[s] = 0
        sigma[s] = 1.0
        npred[s] = 0
        item[0] = s
        nxt[0] = -1
        head[0] = 0
        used = 1
        pending = 1
        count = 0
        cur = 0
        while pending > 0:
            bkt = cur % span
            while head[bkt] != -1:
                slot = head[bkt]
                head[bkt] = nxt[slot]
                pending -= 1
                v = item[slot]
                if dist[v] != cur:
                    continue  # stale entry
                order[count] = v
                count += 1
                delta[v] = 0.0
                dist[v] = -cur - 1  # settled
                sv = sigma[v]
                for e in range(indptr[v], indptr[v + 1]):
                    w = indices[e]
                    dw = dist[w]
                    if dw < 0:
                        continue
                    nd = cur + lengths[e]
                    if nd < dw:
                        dist[w] = nd
                        sigma[w] = sv
                        pred[indptr[w]] = v
                        npred[w] = 1
                        item[used] = w
                        b2 = nd % span
                        nxt[used] = head[b2]
                        head[b2] = used
                        used += 1
                        pending += 1
                    elif nd == dw:
                        sigma[w] += sv
                        pred[indptr[w] + npred[w]] = v
                        npred[w] += 1
            cur += 1
        for t in range(count - 1, 0, -1):
            w = order[t]
            coeff = (1.0 + delta[w]) / sigma[w]
            base = indptr[w]
            for k in range(npred[w]):
                v = pred[base + k]
                delta[v] += sigma[v] * coeff
            bc[w] += delta[w]
        for t in range(count):
            dist[order[t]] = unreached
    return bc


@jit
def _brandes_heap(indptr, indices, dist_w, tol):
    n = indptr.shape[0] - 1
    bc = np.zeros(n)
    dist = np.empty(n)
    sigma = np.empty(n)
    delta = np.empty(n)
    done = np.zeros(n, np.bool_)
    order = np.empty(n, np.int64)
    cap = indices.shape[0] + 1
    hkeys = np.empty(cap)
    hvals = np.empty(cap, np.int64)
    for s in range(n):
        dist[:] = np.inf
        done[:] = False
        dist[s] = 0.0
        size = _heap_push(hkeys, hvals, 0, 0.0, s)
        count = 0
        while size > 0:
            d, v, size = _heap_pop(hkeys, hvals, size)
            if done[v] or d > dist[v]:
                continue
            done[v] = True
            order[count] = v
            count += 1
            for e in range(indptr[v], indptr[v + 1]):
                w = indices[e]
                nd = d + dist_w[e]
                if not done[w] and nd < dist[w] and not _same(nd, dist[w], tol):
                    dist[w] = nd
                    size = _heap_push(hkeys, hvals, size, nd, w)
        # path counts in settle order; predecessors sit on tight edges
        for t in range(count):
            w = order[t]
            sigma[w] = 1.0 if w == s else 0.0
            delta[w] = 0.0
            if w == s:
                continue
            for e in range(indptr[w], indptr[w + 1]):
                v = indices[e]
                if done[v] and dist[v] < dist[w] and _same(dist[v] + dist_w[e], dist[w], tol):
                    sigma[w] += sigma[v]
        for t in range(count - 1, 0, -1):
            w = order[t]
            coeff = (1.0 + delta[w]) / sigma[w]
            for e in range(indptr[w], indptr[w + 1]):
                v = indices[e]
                if done[v] and dist[v] < dist[w] and _same(dist[v] + dist_w[e], dist[w], tol):
                    delta[v] += sigma[v] * coeff
            bc[w] += delta[w]
    return bc


def _edge_distances(weights: np.ndarray) -> tuple[np.ndarray, float]:
    """Inverse-weight distances, scaled to exact integers when the weights allow it."""
    if len(weights) == 0:
        return weights.copy(), 0.0
    distinct = np.unique(weights)
    if np.all(distinct == np.round(distinct)) and distinct.max() < _MAX_LCM:
        lcm = reduce(math.lcm, (int(x) for x in distinct), 1)
        if lcm < _MAX_LCM:
            return lcm / weights, 0.0
    return 1.0 / weights, 1e-12


def betweenness_centrality(g: HasnGraph) -> np.ndarray:
    """Brandes betweenness with edge length ``1/weight``, unnormalised, unordered pairs.

    Integer weights are turned into integer lengths via their least common
    multiple so shortest-path ties are detected exactly; small integer lengths
    then run on a bucket queue instead of a binary heap.
    """
    if len(g.weights) and not np.all(g.weights > 0):
        raise GraphError("betweenness needs strictly positive edge weights")
    if g.n_nodes == 0:
        return np.zeros(0)
    dist_w, tol = _edge_distances(g.weights)
    if tol == 0.0 and len(dist_w) and dist_w.max() < _MAX_BUCKET_SPAN:
        span = int(dist_w.max()) + 1
        return _brandes_buckets(g.indptr, g.indices, dist_w.astype(np.int64), span) / 2.0
    return _brandes_heap(g.indptr, g.indices, dist_w, tol) / 2.0


# -- clustering coefficient ---------------------------------------------------

def _triangles(g: HasnGraph) -> np.ndarray:
    # common neighbours of an edge = triangles on it; each node's triangles
    # are then counted once per incident triangle edge, i.e. twice
    tri = np.zeros(g.n_nodes)
    u, v, _ = g.edge_arrays()
    common = _edge_common(g.indptr, g.indices, u, v)
    np.add.at(tri, u, common)
    np.add.at(tri, v, common)
    return tri / 2.0


@jit
def _edge_common(indptr, indices, us, vs):
    out = np.zeros(us.shape[0])
    for k in range(us.shape[0]):
        u, v = us[k], vs[k]
        i, iend = indptr[u], indptr[u + 1]
        j, jend = indptr[v], indptr[v + 1]
        c = 0
        while i < iend and j < jend:
            a, b = indices[i], indices[j]
            if a == b:
                c += 1
                i += 1
                j += 1
            elif a < b:
                i += 1
            else:
                j += 1
        out[k] = c
    return out


def clustering_coefficient(g: HasnGraph) -> np.ndarray:
    """Unweighted local clustering; nodes with fewer than two neighbours get 0."""
    d = np.diff(g.indptr).astype(np.float64)
    tri = _triangles(g)
    out = np.zeros(g.n_nodes)
    ok = d >= 2
    out[ok] = 2.0 * tri[ok] / (d[ok] * (d[ok] - 1.0))
    return out


# -- humanoid score -----------------------------------------------------------

def minmax(values: np.ndarray) -> np.ndarray:
    """Scale to [0, 1]; a constant vector maps to 0.5 throughout."""
    values = np.asarray(values, dtype=np.float64)
    if len(values) == 0:
        return values.copy()
    lo, hi = values.min(), values.max()
    if hi == lo:
        return np.full(len(values), 0.5)
    return (values - lo) / (hi - lo)


def humanoid_arrays(g: HasnGraph, mode=ScoringMode.ALL, policy: EdgeWeightPolicy | None = None):
    """``(ai_ids, ec, bc, cc, combined)`` arrays over the AI nodes of ``g``.

    Measures not used by ``mode`` are returned as NaN and never computed.
    """
    mode = ScoringMode.parse(mode)
    ai_pos = np.flatnonzero(g.is_ai)
    if len(ai_pos) == 0:
        raise GraphError("humanoid scores need at least one AI node")
    h = reweight_edges(g, policy)
    measures = mode.measures
    nan = np.full(len(ai_pos), np.nan)
    ec = eigenvector_centrality(h)[ai_pos] if "ec" in measures else nan
    bc = betweenness_centrality(h)[ai_pos] if "bc" in measures else nan
    cc = clustering_coefficient(h)[ai_pos] if "cc" in measures else nan
    combined = np.zeros(len(ai_pos))
    if "ec" in measures:
        combined += minmax(ec)
    if "bc" in measures:
        combined += minmax(bc)
    if "cc" in measures:
        combined += 1.0 - minmax(cc)
    return g.node_ids[ai_pos], ec, bc, cc, combined


def humanoid_scores(g: HasnGraph, mode=ScoringMode.ALL,
                    policy: EdgeWeightPolicy | None = None) -> list[HumanoidScore]:
    ids, ec, bc, cc, combined = humanoid_arrays(g, mode, policy)
    return [HumanoidScore(int(i), float(a), float(b), float(c), float(s))
            for i, a, b, c, s in zip(ids, ec, bc, cc, combined)]


def lowest_humanoid_ai(scores) -> int:
    """AI with the smallest combined score, ties to the smallest node id.

    Accepts ``HumanoidScore`` objects or ``(node, combined)`` pairs.
    """
    items = [(s.node, s.combined) if isinstance(s, HumanoidScore) else (int(s[0]), float(s[1]))
             for s in scores]
    if not items:
        raise ValueError("no scores to choose from")
    return min(items, key=lambda t: (t[1], t[0]))[0]


def lowest_humanoid_from_arrays(ids: np.ndarray, combined: np.ndarray) -> int:
    low = combined.min()
    return int(ids[combined == low].min())
