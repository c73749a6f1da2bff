"""Command line entry point: ``metacd synth|cluster|eval|sweep|bench``."""
from __future__ import annotations

import argparse
import csv
import itertools
import json
import logging
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .cusa import AnnealConfig, CoolingPolicy, cusa_run, trace_to_csv
from .graph import HasnGraph
from .io import (RunManifest, load_edge_list, load_hasn, load_partition, save_hasn,
                 save_partition)
from .metrics import evaluate
from .objective import ObjectiveKind
from .rng import stream
from .scoring import EdgeWeightPolicy, ScoringMode
from .synthesis import EvolutionConfig, GenStrategyConfig, gen_er_graph
from . import experiment

log = logging.getLogger("metacd")

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- shared flag groups -------------------------------------------------------

def _add_strategy_flags(p):
    d = GenStrategyConfig()
    p.add_argument("--strategy", default="1", help="1|2|3|4 or random|inverse-degree|intro-extro|dual")
    p.add_argument("--ai-ratio", type=float, default=d.ai_ratio)
    p.add_argument("--lam", type=float, default=d.lam, help="mean AI degree, strategy 1")
    p.add_argument("--a", type=float, default=d.a, help="base link probability, strategy 2")
    p.add_argument("--r", type=float, default=d.r, help="degree decay, strategy 2")
    p.add_argument("--x", type=float, default=d.x, help="in-group link probability, strategies 3/4")
    p.add_argument("--y", type=float, default=d.y, help="out-of-group link probability, strategies 3/4")
    e = EvolutionConfig()
    p.add_argument("--evolve-pairs", type=int, default=e.pairs_per_round)
    p.add_argument("--evolve-rounds", type=int, default=e.rounds)
    p.add_argument("--no-evolve", action="store_true")


def _add_anneal_flags(p):
    d = AnnealConfig()
    p.add_argument("--t-initial", type=float, default=d.t_initial)
    p.add_argument("--t-min", type=float, default=d.t_min)
    p.add_argument("--cooling", type=float, default=d.cooling)
    p.add_argument("--cooling-policy", default=d.cooling_policy.value, help="every|improvement")
    p.add_argument("--max-iterations", type=int, default=None)
    p.add_argument("--scoring", default="all", help="all|ec|bc|cc|ec+bc|ec+cc|bc+cc")
    p.add_argument("--weights", default="3,2,1", help="hh,ha,aa edge weights")
    p.add_argument("--objective", default="HQ", help="HQ|Q")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=1.0)


def _gen_config(a, seed) -> GenStrategyConfig:
    return GenStrategyConfig(strategy=a.strategy, ai_ratio=a.ai_ratio, lam=a.lam, a=a.a, r=a.r,
                             x=a.x, y=a.y, seed=seed)


def _evolution(a) -> EvolutionConfig | None:
    if a.no_evolve:
        return None
    return EvolutionConfig(a.evolve_pairs, a.evolve_rounds)


def _anneal_config(a) -> AnnealConfig:
    return AnnealConfig(
        t_initial=a.t_initial, t_min=a.t_min, cooling=a.cooling,
        cooling_policy=CoolingPolicy.parse(a.cooling_policy),
        scoring_mode=ScoringMode.parse(a.scoring), weights=EdgeWeightPolicy.parse(a.weights),
        objective=ObjectiveKind(a.objective, a.alpha, a.beta, a.gamma),
        seed=a.seed, max_iterations=a.max_iterations)


def _manifest_path(out) -> Path:
    out = Path(out)
    return out.with_name(out.name + ".manifest.json")


# -- subcommands --------------------------------------------------------------

def cmd_synth(a) -> int:
    data = load_edge_list(a.input, a.labels)
    if data.warnings:
        log.warning("dropped %d duplicate edges and %d self-loops", data.duplicates, data.self_loops)
    gen = _gen_config(a, a.seed)
    evo = _evolution(a)
    params = {k: v for k, v in vars(a).items() if k != "func"}
    man = RunManifest.start("synth", params, a.seed, [a.input, a.labels])
    g = experiment.synthesize(data.graph, gen, evo, data.labels)
    save_hasn(g, a.out)
    man.finish([a.out]).save(_manifest_path(a.out))
    print(f"{g!r} -> {a.out}")
    return EXIT_OK


def cmd_cluster(a) -> int:
    g = load_hasn(a.input)
    cfg = _anneal_config(a)
    man = RunManifest.start("cluster", {"method": a.method, "anneal": cfg.to_dict()}, a.seed, [a.input])
    res = experiment.run_method(g, a.method, cfg, a.seed)
    extra = {"method": a.method, "seed": a.seed,
             "retained_ai": [int(x) for x in res.graph.ai_ids],
             "removed_ai": [int(x) for x in sorted(set(g.ai_ids.tolist()) - set(res.graph.ai_ids.tolist()))]}
    if res.cusa is not None:
        extra["best_hq"] = res.cusa.best_hq
    save_partition(res.partition, a.out, **extra)
    outputs = [a.out]
    if a.trace:
        trace = res.cusa.trace if res.cusa is not None else []
        Path(a.trace).write_text(trace_to_csv(trace), encoding="utf-8")
        outputs.append(a.trace)
    man.finish(outputs).save(_manifest_path(a.out))
    print(f"{a.method}: K={res.partition.n_communities}, retained AI={res.graph.ai_count} -> {a.out}")
    return EXIT_OK


def cmd_eval(a) -> int:
    g = load_hasn(a.input)
    p, _ = load_partition(a.partition)
    ref = load_partition(a.reference)[0] if a.reference else None
    obj = ObjectiveKind(a.objective, a.alpha, a.beta, a.gamma)
    report = evaluate(g, p, ref, obj)
    text = report.to_csv() if str(a.out).lower().endswith(".csv") else report.to_json() + "\n"
    if a.out:
        Path(a.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _grid(config: dict):
    as_list = lambda v: v if isinstance(v, list) else [v]
    strategies = as_list(config.get("strategies", [1]))
    ratios = as_list(config.get("ai_ratio", [GenStrategyConfig().ai_ratio]))
    weights = as_list(config.get("weights", ["3,2,1"]))
    graphs = as_list(config.get("graph", ["input"]))
    evolve = as_list(config.get("evolve", [not config.get("no_evolve", False)]))
    scoring = as_list(config.get("scoring", ["all"]))
    for graph, s, ratio, w, ev, sc in itertools.product(graphs, strategies, ratios, weights, evolve, scoring):
        yield {"graph": graph, "strategy": str(s), "ai_ratio": float(ratio), "weights": str(w),
               "evolve": bool(ev), "scoring": str(sc)}


def _sweep_job(job):
    params, seed, config = job
    base = config["_human"]
    if params["graph"] == "er":
        h = gen_er_graph(base.n_nodes, base.edge_count, stream(seed, "er"))
        labels = None
    else:
        h, labels = base, config.get("_labels")
    gen_kw = {k: config[k] for k in ("lam", "a", "r", "x", "y") if k in config}
    gen = GenStrategyConfig(strategy=params["strategy"], ai_ratio=params["ai_ratio"], seed=seed, **gen_kw)
    evo = EvolutionConfig(int(config.get("evolve_pairs", 100)), int(config.get("evolve_rounds", 4))) \
        if params["evolve"] else None
    anneal = AnnealConfig(
        t_initial=float(config.get("t_initial", 1.0)), t_min=float(config.get("t_min", 1e-3)),
        cooling=float(config.get("cooling", 0.95)),
        scoring_mode=ScoringMode.parse(params["scoring"]),
        weights=EdgeWeightPolicy.parse(params["weights"]), seed=seed)
    methods = config.get("methods", list(experiment.METHODS))
    return [r.row() for r in experiment.run_seed(h, gen, evo, methods, anneal, labels, params)]


def cmd_sweep(a) -> int:
    config = json.loads(Path(a.config).read_text(encoding="utf-8"))
    if "input" not in config:
        raise UsageError("sweep config needs an 'input' edge list")
    base_dir = Path(a.config).parent
    resolve = lambda p: p if Path(p).is_absolute() else str(base_dir / p)
    data = load_edge_list(resolve(config["input"]), resolve(config["labels"]) if config.get("labels") else None)
    config = dict(config, _human=data.graph, _labels=data.labels)
    seeds = range(a.seed, a.seed + a.seeds)
    jobs = [(params, s, config) for params in _grid(config) for s in seeds]
    if a.workers > 1:
        with ProcessPoolExecutor(a.workers) as ex:
            results = list(ex.map(_sweep_job, jobs))
    else:
        results = [_sweep_job(j) for j in jobs]
    rows = [r for batch in results for r in batch]
    out = Path(a.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "runs.csv", rows)
    groups: dict = {}
    for r in rows:
        key = tuple((k, r[k]) for k in ("graph", "strategy", "ai_ratio", "weights", "evolve", "scoring", "method"))
        groups.setdefault(key, []).append(r)
    summary = []
    for key, rs in groups.items():
        row = dict(key)
        for m in ("q", "hq", "hmr", "adm"):
            vals = [float(r[m]) for r in rs if r[m] is not None and math.isfinite(float(r[m]))]
            row[m] = repr(float(np.mean(vals))) if vals else ""
        row["runs"] = len(rs)
        summary.append(row)
    _write_csv(out / "summary.csv", summary)
    man = RunManifest.start("sweep", {k: v for k, v in config.items() if not k.startswith("_")},
                            a.seed, [a.config])
    man.finish([out / "runs.csv", out / "summary.csv"]).save(out / "manifest.json")
    print(f"{len(rows)} runs -> {out}")
    return EXIT_OK


def _write_csv(path, rows):
    fields = list(rows[0].keys()) if rows else []
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})


def bench_graph(n_nodes: int, n_edges: int, n_ai: int, seed: int) -> HasnGraph:
    """G(n, m) graph with ``n_ai`` randomly chosen nodes relabelled as AI."""
    g = gen_er_graph(n_nodes, n_edges, stream(seed, "bench"))
    ai = np.zeros(n_nodes, dtype=bool)
    ai[stream(seed, "bench-ai").choice(n_nodes, size=n_ai, replace=False)] = True
    u, v, w = g.edge_arrays()
    return HasnGraph.from_arrays(g.node_ids, ai, u, v, w)


def run_bench(sizes, n_nodes=1000, n_ai=20, iterations=4, seed=0, repeats=1):
    """Wall time of a fixed-length CUSA run per edge count (node count held fixed)."""
    cfg = AnnealConfig(seed=seed, max_iterations=iterations)
    cusa_run(bench_graph(50, 200, 5, seed), cfg)  # compile kernels outside the timing
    rows = []
    for m in sizes:
        g = bench_graph(n_nodes, int(m), n_ai, seed)
        best = math.inf
        for _ in range(repeats):
            t0 = time.perf_counter()
            res = cusa_run(g, cfg)
            best = min(best, time.perf_counter() - t0)
        rows.append({"edges": int(m), "nodes": n_nodes, "ai": n_ai,
                     "iterations": len(res.trace), "seconds": best})
    return rows


def power_law_exponent(edges, seconds) -> float:
    slope, _ = np.polyfit(np.log(np.asarray(edges, float)), np.log(np.asarray(seconds, float)), 1)
    return float(slope)


def cmd_bench(a) -> int:
    sizes = [int(s) for s in a.sizes.split(",") if s]
    if not sizes:
        raise UsageError("--sizes needs at least one edge count")
    rows = run_bench(sizes, a.nodes, a.ai, a.iterations, a.seed, a.repeats)
    _write_csv(a.out, rows)
    if len(rows) > 1:
        print(f"power-law exponent in |E|: {power_law_exponent([r['edges'] for r in rows], [r['seconds'] for r in rows]):.3f}")
    return EXIT_OK


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="metacd", description="Human-centric community detection in hybrid human-AI networks")
    p.add_argument("--version", action="version", version=f"metacd {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("synth", help="insert AI nodes into a human network")
    s.add_argument("--input", required=True)
    s.add_argument("--labels")
    _add_strategy_flags(s)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)

    c = sub.add_parser("cluster", help="cluster a HASN file")
    c.add_argument("--input", required=True)
    c.add_argument("--method", required=True, choices=experiment.METHODS)
    _add_anneal_flags(c)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out", required=True)
    c.add_argument("--trace")
    c.set_defaults(func=cmd_cluster)

    e = sub.add_parser("eval", help="score a partition")
    e.add_argument("--input", required=True)
    e.add_argument("--partition", required=True)
    e.add_argument("--reference")
    e.add_argument("--objective", default="HQ")
    e.add_argument("--alpha", type=float, default=1.0)
    e.add_argument("--beta", type=float, default=1.0)
    e.add_argument("--gamma", type=float, default=1.0)
    e.add_argument("--out")
    e.set_defaults(func=cmd_eval)

    w = sub.add_parser("sweep", help="repeat seeded runs over a parameter grid")
    w.add_argument("--config", required=True)
    w.add_argument("--seeds", type=int, default=20)
    w.add_argument("--seed", type=int, default=0, help="first seed")
    w.add_argument("--workers", type=int, default=1)
    w.add_argument("--out", required=True)
    w.set_defaults(func=cmd_sweep)

    b = sub.add_parser("bench", help="CUSA wall time against edge count")
    b.add_argument("--sizes", default="10000,50000,100000,200000")
    b.add_argument("--nodes", type=int, default=1000)
    b.add_argument("--ai", type=int, default=20)
    b.add_argument("--iterations", type=int, default=4)
    b.add_argument("--repeats", type=int, default=1)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return a.func(a)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"metacd: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as exc:
        print(f"metacd: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
