"""Simulated-annealing AI removal driven by humanoid scores and AI-aware Louvain.

Each iteration scores the remaining AIs, proposes removing the least humanoid
one, reclusters the smaller graph, and accepts the removal when HQ improves
or, failing that, with Metropolis probability ``exp(DE / T)``.
"""
from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .graph import HasnGraph, Partition, remove_node
from .louvain import louvain
from .metrics import score_labels
from .objective import ObjectiveKind
from .rng import derive_seed, stream
from .scoring import EdgeWeightPolicy, ScoringMode, humanoid_arrays, lowest_humanoid_from_arrays


class CoolingPolicy(enum.Enum):
    EVERY_ITERATION = "every"
    ON_IMPROVEMENT = "improvement"

    @classmethod
    def parse(cls, value) -> "CoolingPolicy":
        if isinstance(value, CoolingPolicy):
            return value
        text = str(value).strip().lower().replace("-", "_")
        if text in ("every", "every_iteration", "everyiteration"):
            return cls.EVERY_ITERATION
        if text in ("improvement", "on_improvement", "on_improvement_only", "onimprovementonly"):
            return cls.ON_IMPROVEMENT
        raise ValueError(f"unknown cooling policy {value!r}")


@dataclass(frozen=True)
class AnnealConfig:
    t_initial: float = 1.0
    t_min: float = 1e-3
    cooling: float = 0.95
    cooling_policy: CoolingPolicy = CoolingPolicy.EVERY_ITERATION
    scoring_mode: ScoringMode = ScoringMode.ALL
    weights: EdgeWeightPolicy = field(default_factory=EdgeWeightPolicy)
    objective: ObjectiveKind = field(default_factory=ObjectiveKind.hq)
    seed: int = 0
    # hard stop; needed when cooling only happens on improvement
    max_iterations: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "cooling_policy", CoolingPolicy.parse(self.cooling_policy))
        object.__setattr__(self, "scoring_mode", ScoringMode.parse(self.scoring_mode))
        if not (self.t_initial > 0 and self.t_min > 0):
            raise ValueError("temperatures must be positive")
        if not 0 < self.cooling < 1:
            raise ValueError("cooling factor must lie in (0, 1)")
        if self.max_iterations is not None and self.max_iterations < 0:
            raise ValueError("max_iterations must be non-negative")

    def to_dict(self) -> dict:
        return {
            "t_initial": self.t_initial, "t_min": self.t_min, "cooling": self.cooling,
            "cooling_policy": self.cooling_policy.value, "scoring_mode": self.scoring_mode.value,
            "weights": list(self.weights.as_tuple()), "objective": self.objective.kind,
            "alpha": self.objective.alpha, "beta": self.objective.beta,
            "gamma": self.objective.gamma, "seed": self.seed,
            "max_iterations": self.max_iterations,
        }


def schedule_length(t_initial: float, t_min: float, cooling: float) -> int:
    """Iterations before ``T = t_initial * c**k`` drops to ``t_min`` or below."""
    if t_min >= t_initial:
        return 0
    k = math.ceil(math.log(t_min / t_initial) / math.log(cooling))
    # guard against log rounding in either direction
    while k > 0 and t_initial * cooling ** (k - 1) <= t_min:
        k -= 1
    while t_initial * cooling ** k > t_min:
        k += 1
    return k


def termination_bound(ai_count: int, cfg: AnnealConfig) -> int:
    return max(ai_count, schedule_length(cfg.t_initial, cfg.t_min, cfg.cooling))


def accept_rule(de: float, t: float, u: float) -> bool:
    """Metropolis rule: always take an improvement, else accept if ``exp(de/t) > u``."""
    if de > 0:
        return True
    if t <= 0:
        return False
    return math.exp(de / t) > u


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    rnode: int
    de: float
    temperature: float
    u: float
    accepted: bool
    hq_current: float
    hq_new: float
    hq_best: float

    FIELDS = ("iteration", "rnode", "DE", "T", "u", "accepted", "hq_current", "hq_new", "hq_best")

    def row(self) -> list:
        return [self.iteration, self.rnode, repr(self.de), repr(self.temperature), repr(self.u),
                int(self.accepted), repr(self.hq_current), repr(self.hq_new), repr(self.hq_best)]


def trace_to_csv(trace) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TraceRecord.FIELDS)
    for rec in trace:
        writer.writerow(rec.row())
    return buf.getvalue()


@dataclass
class AnnealState:
    graph: HasnGraph
    partition: Partition
    hq: float
    temperature: float
    best_graph: HasnGraph
    best_partition: Partition
    best_hq: float
    removed_ais: list = field(default_factory=list)
    best_removed: list = field(default_factory=list)
    trace: list = field(default_factory=list)


@dataclass
class CusaResult:
    partition: Partition       # best partition, over humans plus retained AIs
    removed_ais: list          # removals applied to reach the best graph
    trace: list
    best_hq: float
    graph: HasnGraph           # graph the best partition belongs to
    accepted_removals: list    # every accepted removal, in order

    @property
    def retained_ais(self) -> np.ndarray:
        return self.graph.ai_ids


def retained_ai_set(trace, ai_nodes) -> set:
    """Input AI nodes minus every removal the trace accepted."""
    removed = {rec.rnode for rec in trace if rec.accepted}
    return {int(a) for a in ai_nodes} - removed


def _hq(g: HasnGraph, p: Partition, obj: ObjectiveKind) -> float:
    if g.total_weight <= 0:
        return -math.inf
    return score_labels(g, p.membership, obj)


def cusa_run(g: HasnGraph, cfg: AnnealConfig | None = None) -> CusaResult:
    cfg = AnnealConfig() if cfg is None else cfg
    obj = cfg.objective
    lv_seed = derive_seed(cfg.seed, "louvain")
    rng = stream(cfg.seed, "anneal")

    def cluster(graph):
        # fixed seed per run makes the partition a function of the graph alone,
        # so reusing P after a rejection equals reclustering G
        return louvain(graph, obj, lv_seed)

    p0 = cluster(g)
    hq0 = _hq(g, p0, obj)
    st = AnnealState(g, p0, hq0, cfg.t_initial, g, p0, hq0)
    cap = cfg.max_iterations
    if cap is None and cfg.cooling_policy is CoolingPolicy.ON_IMPROVEMENT:
        cap = 10 * termination_bound(g.ai_count, cfg)

    scores = None   # humanoid scores of st.graph
    proposal = None  # (rnode, G_new, P_new, hq_new) for st.graph
    it = 0
    while st.temperature > cfg.t_min and st.graph.ai_count > 0 and (cap is None or it < cap):
        if scores is None:
            ids, _, _, _, combined = humanoid_arrays(st.graph, cfg.scoring_mode, cfg.weights)
            scores = (ids, combined)
        rnode = lowest_humanoid_from_arrays(*scores)
        if proposal is None or proposal[0] != rnode:
            g_new = remove_node(st.graph, rnode)
            p_new = cluster(g_new)
            proposal = (rnode, g_new, p_new, _hq(g_new, p_new, obj))
        _, g_new, p_new, hq_new = proposal
        de = hq_new - st.hq
        if math.isnan(de):  # both graphs edgeless
            de = -math.inf
        u = float(rng.random())
        t = st.temperature
        accepted = accept_rule(de, t, u)
        hq_current = st.hq
        if accepted:
            st.graph, st.partition, st.hq = g_new, p_new, hq_new
            st.removed_ais.append(rnode)
            scores = None
            proposal = None
        if st.hq >= st.best_hq:
            st.best_graph, st.best_partition, st.best_hq = st.graph, st.partition, st.hq
            st.best_removed = list(st.removed_ais)
        if cfg.cooling_policy is CoolingPolicy.EVERY_ITERATION or (accepted and de > 0):
            st.temperature = t * cfg.cooling
        st.trace.append(TraceRecord(it, int(rnode), float(de), float(t), u, bool(accepted),
                                    float(hq_current), float(hq_new), float(st.best_hq)))
        it += 1
    return CusaResult(st.best_partition, st.best_removed, st.trace, st.best_hq, st.best_graph,
                      list(st.removed_ais))
