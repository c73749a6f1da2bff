"""Evaluation: Q, HQ, and human migration against an AI-free reference."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .graph import HasnGraph, Partition, induced_subgraph, membership_for, stats_from_labels
from .objective import (ObjectiveKind, community_terms, community_weights,
                        reward_penalty_w)

__all__ = [
    "MetricError", "MetricReport", "adm", "align_partitions", "evaluate",
    "human_modularity_hq", "hmr", "migrations", "modularity_q", "reward_penalty_w",
    "score_labels",
]

NEW = -1  # candidate community with no reference counterpart


class MetricError(ValueError):
    pass


def score_labels(g: HasnGraph, labels, obj: ObjectiveKind) -> float:
    m2 = g.total_weight
    if m2 <= 0:
        raise MetricError("modularity is undefined on a graph without edges")
    st = stats_from_labels(g, labels)
    terms = community_terms(st.sigma_in, st.sigma_tot, m2)
    return float(np.sum(community_weights(st.humans, st.ais, obj) * terms))


def modularity_q(g: HasnGraph, p: Partition) -> float:
    return score_labels(g, membership_for(g, p), ObjectiveKind.q())


def human_modularity_hq(g: HasnGraph, p: Partition, obj: ObjectiveKind | None = None) -> float:
    """Modularity with every community term scaled by ``alpha * W(C)``."""
    obj = ObjectiveKind.hq() if obj is None else obj
    if not obj.human_weighted:
        obj = ObjectiveKind.hq(obj.alpha, obj.beta, obj.gamma)
    return score_labels(g, membership_for(g, p), obj)


def _shared(reference: Partition, candidate: Partition, nodes=None):
    shared = np.intersect1d(reference.node_ids, candidate.node_ids)
    if nodes is not None:
        shared = np.intersect1d(shared, np.asarray(nodes, dtype=np.int64))
    ref = reference.membership[np.searchsorted(reference.node_ids, shared)]
    cand = candidate.membership[np.searchsorted(candidate.node_ids, shared)]
    return shared, ref, cand


def align_partitions(reference: Partition, candidate: Partition, nodes=None) -> dict[int, int]:
    """Greedy max-overlap matching of candidate communities onto reference ones.

    Overlap is counted over the shared node set (the humans, when the reference
    is the AI-free clustering).  Pairs are taken by decreasing overlap, ties by
    the smaller (candidate, reference) pair, where communities are ordered by
    their smallest shared node id.  For canonically labelled partitions that is
    plain index order, and it keeps the result independent of labelling.
    Candidate communities left over map to ``NEW`` (-1).
    """
    _, ref, cand = _shared(reference, candidate, nodes)
    mapping = {int(c): NEW for c in np.unique(candidate.membership)}
    if len(ref) == 0:
        return mapping
    pairs, counts = np.unique(np.stack([cand, ref], axis=1), axis=0, return_counts=True)
    # shared ids are sorted, so the first hit of a label is its smallest member
    first_c = dict(zip(*np.unique(cand, return_index=True)))
    first_r = dict(zip(*np.unique(ref, return_index=True)))
    kc = np.array([first_c[c] for c in pairs[:, 0]])
    kr = np.array([first_r[r] for r in pairs[:, 1]])
    order = np.lexsort((kr, kc, -counts))
    used_ref = set()
    for c, r in pairs[order]:
        c, r = int(c), int(r)
        if mapping[c] == NEW and r not in used_ref:
            mapping[c] = r
            used_ref.add(r)
    return mapping


def migrations(reference: Partition, candidate: Partition, nodes=None) -> int:
    """Shared nodes whose aligned candidate community is not their reference one."""
    _, ref, cand = _shared(reference, candidate, nodes)
    mapping = align_partitions(reference, candidate, nodes)
    mapped = np.array([mapping[int(c)] for c in cand], dtype=np.int64)
    return int(np.count_nonzero(mapped != ref))


def hmr(reference: Partition, candidate: Partition, nodes=None) -> float:
    """Human migration ratio in [0, 1]."""
    shared, _, _ = _shared(reference, candidate, nodes)
    if len(shared) == 0:
        raise MetricError("partitions share no nodes")
    return migrations(reference, candidate, nodes) / len(shared)


def adm(reference: Partition, candidate: Partition, retained_ai_count: int, nodes=None) -> float:
    """Migrations per retained AI; 0 for 0/0 and ``inf`` for x/0."""
    if retained_ai_count < 0:
        raise MetricError("retained AI count must be non-negative")
    moved = migrations(reference, candidate, nodes)
    if retained_ai_count == 0:
        return 0.0 if moved == 0 else math.inf
    return moved / retained_ai_count


@dataclass
class MetricReport:
    q: float
    hq: float
    k_communities: int
    retained_ai: int
    hmr: float | None = None
    adm: float | None = None
    adm_infinite: bool = False
    per_community: list = field(default_factory=list)

    CSV_FIELDS = ("q", "hq", "hmr", "adm", "k_communities", "retained_ai")

    def to_dict(self) -> dict:
        d = asdict(self)
        if self.adm_infinite:
            d["adm"] = None
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def csv_row(self) -> dict:
        d = self.to_dict()
        return {k: d[k] for k in self.CSV_FIELDS}

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=self.CSV_FIELDS, lineterminator="\n")
        writer.writeheader()
        writer.writerow(self.csv_row())
        return buf.getvalue()


def evaluate(g: HasnGraph, p: Partition, reference: Partition | None = None,
             obj: ObjectiveKind | None = None) -> MetricReport:
    """Report for a partition of (a node subset of) ``g``.

    Q and HQ are measured on the subgraph induced by the partition's nodes,
    i.e. the graph left after the removed AIs are gone.  Migration metrics are
    computed over humans shared with ``reference`` when one is given.
    """
    obj = ObjectiveKind.hq() if obj is None else obj
    sub = induced_subgraph(g, p.node_ids)
    labels = membership_for(sub, p)
    st = stats_from_labels(sub, labels)
    weights = community_weights(st.humans, st.ais, obj)
    per = [(int(s), int(hh), int(aa), float(w))
           for s, hh, aa, w in zip(st.size, st.humans, st.ais, weights)]
    retained = int(sub.ai_count)
    report = MetricReport(
        q=score_labels(sub, labels, ObjectiveKind.q()),
        hq=score_labels(sub, labels, obj),
        k_communities=p.n_communities,
        retained_ai=retained,
        per_community=per,
    )
    if reference is not None:
        humans = sub.human_ids
        report.hmr = hmr(reference, p, humans)
        value = adm(reference, p, retained, humans)
        report.adm_infinite = math.isinf(value)
        report.adm = value
    return report
