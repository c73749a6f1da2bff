"""Turn a human-only network into a hybrid one and evolve it.

Four AI insertion strategies, Jaccard link-prediction rounds, and a G(n, m)
random-graph generator for control experiments.  Every function that draws
random numbers takes an optional ``numpy.random.Generator``; without one it
derives the synthesis stream from ``cfg.seed``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from ._accel import jit
from .graph import GraphError, HasnGraph, induced_subgraph
from .rng import stream


class Strategy(enum.Enum):
    RANDOM = 1
    INVERSE_DEGREE = 2
    INTRO_EXTRO = 3
    DUAL = 4

    @classmethod
    def parse(cls, value) -> "Strategy":
        if isinstance(value, Strategy):
            return value
        text = str(value).strip().lower().replace("-", "_")
        aliases = {
            "1": cls.RANDOM, "random": cls.RANDOM, "randominsertion": cls.RANDOM,
            "2": cls.INVERSE_DEGREE, "inverse_degree": cls.INVERSE_DEGREE,
            "inversedegree": cls.INVERSE_DEGREE,
            "3": cls.INTRO_EXTRO, "intro_extro": cls.INTRO_EXTRO, "introextro": cls.INTRO_EXTRO,
            "4": cls.DUAL, "dual": cls.DUAL, "dualpersonality": cls.DUAL,
            "dual_personality": cls.DUAL,
        }
        if text not in aliases:
            raise ValueError(f"unknown generation strategy {value!r}")
        return aliases[text]


@dataclass(frozen=True)
class GenStrategyConfig:
    """Parameters of the insertion strategies.

    ``lam`` is the Poisson mean of a random-insertion AI's degree, ``a`` and
    ``r`` the base probability and decay of inverse-degree linking, ``x`` and
    ``y`` the in-group and out-of-group link probabilities of strategies 3/4.
    """

    strategy: Strategy = Strategy.RANDOM
    ai_ratio: float = 0.10
    lam: float = 0.5
    a: float = 0.0005
    r: float = 0.5
    x: float = 0.002
    y: float = 0.0003
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "strategy", Strategy.parse(self.strategy))
        if not 0 < self.ai_ratio <= 1:
            raise ValueError("ai_ratio must lie in (0, 1]")
        if not self.lam > 0:
            raise ValueError("lam must be positive")
        if not 0 < self.a <= 1:
            raise ValueError("a must lie in (0, 1]")
        if not self.r > 0:
            raise ValueError("r must be positive")
        for name in ("x", "y"):
            if not 0 <= getattr(self, name) <= 1:
                raise ValueError(f"{name} must lie in [0, 1]")


@dataclass(frozen=True)
class EvolutionConfig:
    pairs_per_round: int = 100
    rounds: int = 4
    seed: int = 0  # evolution is deterministic; kept for manifest completeness

    def __post_init__(self):
        if self.pairs_per_round < 0 or self.rounds < 0:
            raise ValueError("pairs_per_round and rounds must be non-negative")


class GroupSource(enum.Enum):
    LABELS = "labels"
    LOUVAIN = "louvain"


@dataclass
class GroupAssignment:
    """Group index per human node id."""

    group_of: dict = field(default_factory=dict)
    source: GroupSource = GroupSource.LABELS

    @property
    def n_groups(self) -> int:
        return len(set(self.group_of.values()))

    @classmethod
    def from_labels(cls, labels: dict) -> "GroupAssignment":
        names = sorted({str(v) for v in labels.values()})
        index = {name: i for i, name in enumerate(names)}
        return cls({int(k): index[str(v)] for k, v in labels.items()}, GroupSource.LABELS)

    @classmethod
    def from_louvain(cls, g: HasnGraph, seed=0) -> "GroupAssignment":
        from .louvain import louvain
        from .objective import ObjectiveKind

        humans = induced_subgraph(g, g.human_ids)
        p = louvain(humans, ObjectiveKind.q(), seed)
        return cls(p.as_dict(), GroupSource.LOUVAIN)


def ai_count_for(n_nodes: int, ratio: float) -> int:
    count = int(math.floor(ratio * n_nodes + 1e-9))
    if count < 1:
        raise ValueError(f"ai_ratio {ratio} of {n_nodes} nodes inserts no AI")
    return count


class _Builder:
    """Accumulates new AI nodes and edges on top of an existing graph."""

    def __init__(self, g: HasnGraph):
        self.g = g
        self.n0 = g.n_nodes
        self.next_id = int(g.node_ids.max()) + 1 if g.n_nodes else 0
        self.deg = np.diff(g.indptr).astype(np.int64).tolist()
        self.new_u: list[int] = []
        self.new_v: list[int] = []

    @property
    def n(self) -> int:
        return len(self.deg)

    def add_ai(self) -> int:
        self.deg.append(0)
        return self.n - 1

    def link(self, ai: int, targets) -> None:
        for t in targets:
            t = int(t)
            self.new_u.append(t)
            self.new_v.append(ai)
            self.deg[t] += 1
            self.deg[ai] += 1

    def build(self) -> HasnGraph:
        g = self.g
        k = self.n - self.n0
        node_ids = np.concatenate([g.node_ids, np.arange(self.next_id, self.next_id + k)])
        is_ai = np.concatenate([g.is_ai, np.ones(k, dtype=bool)])
        u0, v0, w0 = g.edge_arrays()
        u = np.concatenate([u0, np.asarray(self.new_u, dtype=np.int64)])
        v = np.concatenate([v0, np.asarray(self.new_v, dtype=np.int64)])
        w = np.concatenate([w0, np.ones(len(self.new_u))])
        return HasnGraph.from_arrays(
            node_ids.astype(np.int64), is_ai, u, v, w,
            self_loops=np.concatenate([g.self_loops, np.zeros(k)]),
            humans=np.concatenate([g.humans, np.zeros(k, dtype=np.int64)]),
            ais=np.concatenate([g.ais, np.ones(k, dtype=np.int64)]))


def _rng(cfg, rng):
    return stream(cfg.seed, "synthesis") if rng is None else rng


def insert_ai_random(g: HasnGraph, cfg: GenStrategyConfig,
                     rng: np.random.Generator | None = None) -> HasnGraph:
    """Each AI links ``max(1, Poisson(lam))`` distinct nodes drawn uniformly
    from everything already in the graph, earlier AIs included."""
    rng = _rng(cfg, rng)
    b = _Builder(g)
    for _ in range(ai_count_for(g.n_nodes, cfg.ai_ratio)):
        pool = b.n
        ai = b.add_ai()
        k = min(max(1, int(rng.poisson(cfg.lam))), pool)
        b.link(ai, np.sort(rng.choice(pool, size=k, replace=False)))
    return b.build()


def inverse_degree_probability(degree, a: float, r: float):
    """Link probability ``a * exp(-r * (d - 1))``, capped at 1."""
    return np.minimum(1.0, a * np.exp(-r * (np.asarray(degree, dtype=np.float64) - 1.0)))


def insert_ai_inverse_degree(g: HasnGraph, cfg: GenStrategyConfig,
                             rng: np.random.Generator | None = None) -> HasnGraph:
    """Each AI tries every existing node, favouring low-degree ones."""
    rng = _rng(cfg, rng)
    b = _Builder(g)
    for _ in range(ai_count_for(g.n_nodes, cfg.ai_ratio)):
        pool = b.n
        p = inverse_degree_probability(b.deg[:pool], cfg.a, cfg.r)
        ai = b.add_ai()
        hits = np.flatnonzero(rng.random(pool) < p)
        if len(hits) == 0:
            hits = [int(rng.integers(pool))]
        b.link(ai, hits)
    return b.build()


def _group_members(g: HasnGraph, groups: GroupAssignment) -> list[np.ndarray]:
    if not groups.group_of:
        raise GraphError("group assignment is empty")
    human_ids = g.human_ids
    missing = [int(h) for h in human_ids if int(h) not in groups.group_of]
    if missing:
        raise GraphError(f"human node {missing[0]} has no group")
    labels = np.array([groups.group_of[int(h)] for h in human_ids], dtype=np.int64)
    pos = g.positions(human_ids)
    return [pos[labels == c] for c in np.unique(labels)]


def _insert_grouped(g, cfg, groups, rng, dual: bool) -> HasnGraph:
    rng = _rng(cfg, rng)
    members = _group_members(g, groups)
    all_humans = np.sort(np.concatenate(members))
    n_ai = ai_count_for(g.n_nodes, cfg.ai_ratio)
    n_intro = n_ai // 2
    b = _Builder(g)
    for idx in range(n_ai):
        home = int(rng.integers(len(members)))
        inside = members[home]
        outside = np.setdiff1d(all_humans, inside, assume_unique=True)
        ai = b.add_ai()
        if dual:
            hits = np.concatenate([inside[rng.random(len(inside)) < cfg.x],
                                   outside[rng.random(len(outside)) < cfg.y]])
            fallback = inside
        elif idx < n_intro:
            hits = inside[rng.random(len(inside)) < cfg.x]
            fallback = inside
        else:
            hits = outside[rng.random(len(outside)) < cfg.y]
            # with a single group there is no outside; any human will do
            fallback = outside if len(outside) else all_humans
        if len(hits) == 0:
            hits = [int(fallback[rng.integers(len(fallback))])]
        b.link(ai, np.sort(np.asarray(hits, dtype=np.int64)))
    return b.build()


def insert_ai_intro_extro(g: HasnGraph, cfg: GenStrategyConfig, groups: GroupAssignment,
                          rng: np.random.Generator | None = None) -> HasnGraph:
    """First half (rounded down) of the AIs are introverts linking inside a
    random home group with probability ``x``; the rest link outside it with
    probability ``y``."""
    return _insert_grouped(g, cfg, groups, rng, dual=False)


def insert_ai_dual(g: HasnGraph, cfg: GenStrategyConfig, groups: GroupAssignment,
                   rng: np.random.Generator | None = None) -> HasnGraph:
    """Every AI links its home group with probability ``x`` and everyone else with ``y``."""
    return _insert_grouped(g, cfg, groups, rng, dual=True)


def insert_ai(g: HasnGraph, cfg: GenStrategyConfig, groups: GroupAssignment | None = None,
              rng: np.random.Generator | None = None) -> HasnGraph:
    if cfg.strategy is Strategy.RANDOM:
        return insert_ai_random(g, cfg, rng)
    if cfg.strategy is Strategy.INVERSE_DEGREE:
        return insert_ai_inverse_degree(g, cfg, rng)
    if groups is None:
        raise GraphError(f"strategy {cfg.strategy.name} needs a group assignment")
    if cfg.strategy is Strategy.INTRO_EXTRO:
        return insert_ai_intro_extro(g, cfg, groups, rng)
    return insert_ai_dual(g, cfg, groups, rng)


# -- evolution ----------------------------------------------------------------

def jaccard(nx_, ny_) -> float:
    a, b = set(nx_), set(ny_)
    union = a | b
    return len(a & b) / len(union) if union else 0.0


@jit
def _jaccard_candidates(indptr, indices):
    n = indptr.shape[0] - 1
    deg = indptr[1:] - indptr[:-1]
    common = np.zeros(n, np.int64)
    adj = np.full(n, -1, np.int64)
    seen = np.full(n, -1, np.int64)
    touched = np.empty(n, np.int64)
    # first pass sizes the output
    total = 0
    for x in range(n):
        for e in range(indptr[x], indptr[x + 1]):
            adj[indices[e]] = x
        for e in range(indptr[x], indptr[x + 1]):
            z = indices[e]
            for f in range(indptr[z], indptr[z + 1]):
                y = indices[f]
                if y > x and adj[y] != x and seen[y] != x:
                    seen[y] = x
                    total += 1
    us = np.empty(total, np.int64)
    vs = np.empty(total, np.int64)
    inter = np.empty(total, np.int64)
    union = np.empty(total, np.int64)
    adj[:] = -1
    seen[:] = -1
    k = 0
    for x in range(n):
        for e in range(indptr[x], indptr[x + 1]):
            adj[indices[e]] = x
        nt = 0
        for e in range(indptr[x], indptr[x + 1]):
            z = indices[e]
            for f in range(indptr[z], indptr[z + 1]):
                y = indices[f]
                if y > x and adj[y] != x:
                    if seen[y] != x:
                        seen[y] = x
                        common[y] = 0
                        touched[nt] = y
                        nt += 1
                    common[y] += 1
        for t in range(nt):
            y = touched[t]
            us[k] = x
            vs[k] = y
            inter[k] = common[y]
            union[k] = deg[x] + deg[y] - common[y]
            k += 1
    return us, vs, inter, union


def jaccard_candidates(g: HasnGraph):
    """Non-adjacent position pairs ``u < v`` with a common neighbour and their similarity."""
    us, vs, inter, union = _jaccard_candidates(g.indptr, g.indices)
    return us, vs, inter / union


def evolve_jaccard(g: HasnGraph, cfg: EvolutionConfig) -> HasnGraph:
    """Add the ``k`` most similar non-adjacent pairs as unit edges, ``r`` times.

    Ties in similarity go to the lexicographically smaller node-id pair.
    Rounds stop early once no candidate pair is left.
    """
    for _ in range(cfg.rounds):
        if cfg.pairs_per_round == 0:
            break
        us, vs, sim = jaccard_candidates(g)
        if len(us) == 0:
            break
        ids = g.node_ids
        order = np.lexsort((ids[vs], ids[us], -sim))[:cfg.pairs_per_round]
        u0, v0, w0 = g.edge_arrays()
        g = HasnGraph.from_arrays(
            g.node_ids, g.is_ai, np.concatenate([u0, us[order]]), np.concatenate([v0, vs[order]]),
            np.concatenate([w0, np.ones(len(order))]),
            self_loops=g.self_loops, humans=g.humans, ais=g.ais)
    return g


# -- random control graphs ----------------------------------------------------

def gen_er_graph(n: int, m: int, seed=0) -> HasnGraph:
    """Uniform simple graph with exactly ``n`` nodes and ``m`` edges, all human."""
    if n < 0 or m < 0:
        raise ValueError("n and m must be non-negative")
    if m > n * (n - 1) // 2:
        raise ValueError(f"{m} edges do not fit in a simple graph on {n} nodes")
    rng = seed if isinstance(seed, np.random.Generator) else stream(seed, "synthesis")
    chosen = np.zeros(0, dtype=np.int64)
    while len(chosen) < m:
        need = m - len(chosen)
        a = rng.integers(0, n, size=2 * need + 16)
        b = rng.integers(0, n, size=2 * need + 16)
        ok = a != b
        keys = np.minimum(a, b)[ok] * n + np.maximum(a, b)[ok]
        merged = np.concatenate([chosen, keys])
        _, first = np.unique(merged, return_index=True)
        chosen = merged[np.sort(first)][:m]
    return HasnGraph.from_arrays(np.arange(n), np.zeros(n, dtype=bool), chosen // n, chosen % n)
