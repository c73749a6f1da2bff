"""One seeded experiment: synthesise a HASN, cluster it, score the result.

Shared by the ``synth``/``cluster``/``sweep`` subcommands and the acceptance
tests so they all follow the same seeding rules: the synthesis, Louvain and
annealing streams are derived from one run seed.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .cusa import AnnealConfig, CusaResult, cusa_run
from .graph import HasnGraph, Partition, induced_subgraph
from .louvain import louvain
from .metrics import MetricReport, evaluate
from .objective import ObjectiveKind
from .rng import derive_seed, stream
from .synthesis import (EvolutionConfig, GenStrategyConfig, GroupAssignment, Strategy,
                        evolve_jaccard, insert_ai)

METHODS = ("cusa", "louvain-n", "louvain-a")


def louvain_seed(seed: int) -> int:
    return derive_seed(seed, "louvain")


def groups_for(h: HasnGraph, labels: dict | None, seed: int) -> GroupAssignment:
    """Ground-truth groups when labels exist, else Louvain groups of the human graph."""
    if labels:
        return GroupAssignment.from_labels(labels)
    return GroupAssignment.from_louvain(h, louvain_seed(seed))


def synthesize(h: HasnGraph, cfg: GenStrategyConfig, evolution: EvolutionConfig | None,
               labels: dict | None = None) -> HasnGraph:
    """Insert AIs into ``h`` and, unless ``evolution`` is None, run Jaccard rounds."""
    groups = None
    if cfg.strategy in (Strategy.INTRO_EXTRO, Strategy.DUAL):
        groups = groups_for(h, labels, cfg.seed)
    g = insert_ai(h, cfg, groups, stream(cfg.seed, "synthesis"))
    if evolution is not None:
        g = evolve_jaccard(g, evolution)
    return g


def human_graph(g: HasnGraph) -> HasnGraph:
    return induced_subgraph(g, g.human_ids)


def reference_partition(g: HasnGraph, seed: int) -> Partition:
    """AI-free anchor for migration counting: modularity Louvain on the humans."""
    return louvain(human_graph(g), ObjectiveKind.q(), louvain_seed(seed))


@dataclass
class MethodResult:
    method: str
    partition: Partition
    graph: HasnGraph
    cusa: CusaResult | None = None

    @property
    def removed_ais(self) -> list:
        if self.cusa is not None:
            return list(self.cusa.removed_ais)
        return []


def run_method(g: HasnGraph, method: str, anneal: AnnealConfig | None = None,
               seed: int = 0) -> MethodResult:
    """``cusa`` anneals, ``louvain-n`` keeps every AI, ``louvain-a`` drops them all."""
    anneal = AnnealConfig(seed=seed) if anneal is None else replace(anneal, seed=seed)
    if method == "cusa":
        res = cusa_run(g, anneal)
        return MethodResult(method, res.partition, res.graph, res)
    if method == "louvain-n":
        return MethodResult(method, louvain(g, anneal.objective, louvain_seed(seed)), g)
    if method == "louvain-a":
        h = human_graph(g)
        return MethodResult(method, louvain(h, anneal.objective, louvain_seed(seed)), h)
    raise ValueError(f"unknown method {method!r}; expected one of {', '.join(METHODS)}")


@dataclass
class RunRecord:
    seed: int
    method: str
    report: MetricReport
    params: dict = field(default_factory=dict)

    def row(self) -> dict:
        d = dict(self.params)
        d.update(seed=self.seed, method=self.method)
        d.update(self.report.csv_row())
        return d


def run_seed(h: HasnGraph, gen: GenStrategyConfig, evolution: EvolutionConfig | None,
             methods=METHODS, anneal: AnnealConfig | None = None, labels: dict | None = None,
             params: dict | None = None) -> list[RunRecord]:
    """Synthesise with ``gen.seed`` and evaluate each method against the reference."""
    seed = gen.seed
    g = synthesize(h, gen, evolution, labels)
    ref = reference_partition(g, seed)
    obj = (anneal or AnnealConfig()).objective
    out = []
    for m in methods:
        res = run_method(g, m, anneal, seed)
        out.append(RunRecord(seed, m, evaluate(res.graph, res.partition, ref, obj), dict(params or {})))
    return out


def summarize(records: list[RunRecord], keys=("q", "hq", "hmr", "adm")) -> dict:
    """Mean of each metric over the records (infinite ADM values are skipped)."""
    out = {}
    for k in keys:
        vals = [getattr(r.report, k) for r in records]
        vals = [v for v in vals if v is not None and np.isfinite(v)]
        out[k] = float(np.mean(vals)) if vals else None
    out["runs"] = len(records)
    return out
