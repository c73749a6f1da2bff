"""Acceptance criteria 1-11.

Each test records a ``CRITERION n: PASS|FAIL ...`` line that the terminal
summary prints at the end of the run.  Criteria that need the Cora dataset
look for it under ``data/cora`` (or ``$METACD_CORA_DIR``) and fail when it
is missing.
"""
import math
import os
import subprocess
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np
import pytest

import conftest
from conftest import cora_dir, load_cora, planted_graph, random_graph, random_labels
from oracles import betweenness_bruteforce, hq_double_sum, q_double_sum
from metacd.cli import power_law_exponent, run_bench
from metacd.cusa import AnnealConfig, cusa_run, termination_bound
from metacd.experiment import run_seed, synthesize
from metacd.graph import Partition, aggregate, stats_from_labels
from metacd.louvain import delta_hq, delta_q, louvain
from metacd.metrics import human_modularity_hq, modularity_q
from metacd.objective import ObjectiveKind
from metacd.scoring import betweenness_centrality
from metacd.synthesis import EvolutionConfig, GenStrategyConfig, Strategy, gen_er_graph

CORA_SEEDS = 20
ER_SEEDS = 3
WORKERS = max(1, os.cpu_count() or 1)


def record(n, ok, detail):
    line = f"CRITERION {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    conftest.ACCEPTANCE[n] = line
    print(line)
    return ok


def check(n, ok, detail):
    record(n, ok, detail)
    assert ok, detail


# -- criteria 1-2: incremental gains against full recomputation -------------

def random_move_case(rng, with_ai):
    """A random (possibly aggregated) graph, a labelling and one node to move."""
    n = int(rng.integers(2, 31))
    g = random_graph(rng, n, float(rng.uniform(0.05, 0.5)), 0.4 if with_ai else 0.0,
                     weights=[1, 2, 3, 0.5])
    if rng.random() < 0.3 and n > 3:
        # coarse level: self-loops and multi-member payloads
        g = aggregate(g, Partition.from_labels(g.node_ids, random_labels(rng, n, max(2, n // 2))))
    labels = random_labels(rng, g.n_nodes).astype(np.int64)
    return g, labels, int(rng.integers(g.n_nodes))


def move_delta(g, labels, i, target, obj):
    """Gain of moving ``i`` from its community to ``target``: insert minus re-insert."""
    iso = labels.copy()
    iso[i] = labels.max() + 1
    st = stats_from_labels(g, iso)
    nbr = g.indices[g.indptr[i]:g.indptr[i + 1]]
    w = g.weights[g.indptr[i]:g.indptr[i + 1]]
    mover = (int(g.humans[i]), int(g.ais[i]))
    loop = float(g.self_loops[i])

    def gain(c):
        if not np.any(iso == c):
            return 0.0
        k_in = float(w[iso[nbr] == c].sum())
        if obj is None:
            return delta_q(st.sigma_in[c], st.sigma_tot[c], g.degrees[i], k_in, g.total_weight, loop)
        return delta_hq(st.sigma_in[c], st.sigma_tot[c], g.degrees[i], k_in, g.total_weight,
                        (int(st.humans[c]), int(st.ais[c])), mover, obj, loop)

    return gain(target) - gain(labels[i])


def run_delta_protocol(seed, obj):
    rng = np.random.default_rng(seed)
    worst, graphs = 0.0, 0
    while graphs < 1000:
        g, labels, i = random_move_case(rng, obj is not None)
        if g.total_weight == 0:
            continue
        graphs += 1
        target = int(rng.choice(np.unique(labels)))
        after = labels.copy()
        after[i] = target
        if obj is None:
            want = q_double_sum(g, after) - q_double_sum(g, labels)
        else:
            want = (hq_double_sum(g, after, obj.alpha, obj.beta, obj.gamma)
                    - hq_double_sum(g, labels, obj.alpha, obj.beta, obj.gamma))
        worst = max(worst, abs(move_delta(g, labels, i, target, obj) - want))
    return graphs, worst


def test_criterion_01_delta_q():
    graphs, worst = run_delta_protocol(101, None)
    check(1, worst <= 1e-9, f"dQ vs double-sum recomputation on {graphs} graphs, max |diff| = {worst:.2e}")


def test_criterion_02_delta_hq():
    rng = np.random.default_rng(5)
    worst, total = 0.0, 0
    for k in range(4):
        obj = ObjectiveKind.hq(*(rng.uniform(0.2, 2.0, 3) if k else (1.0, 1.0, 1.0)))
        graphs, w = run_delta_protocol(200 + k, obj)
        worst, total = max(worst, w), total + graphs
    check(2, worst <= 1e-9, f"dHQ vs double-sum recomputation on {total} graphs, max |diff| = {worst:.2e}")


# -- criterion 3: Brandes against exhaustive enumeration --------------------

def test_criterion_03_betweenness():
    rng = np.random.default_rng(3)
    worst, graphs = 0.0, 0
    weight_sets = ([1, 2, 3], [1.0], [0.7, 1.3, 2.9], [3, 2, 1, 6, 4])
    while graphs < 500:
        n = int(rng.integers(2, 13))
        g = random_graph(rng, n, float(rng.uniform(0.15, 0.6)), 0.0,
                         weights=weight_sets[graphs % len(weight_sets)], connected=True)
        want = np.array([float(x) for x in betweenness_bruteforce(g)])
        worst = max(worst, float(np.max(np.abs(betweenness_centrality(g) - want))))
        graphs += 1
    check(3, worst <= 1e-9, f"Brandes vs path enumeration on {graphs} connected graphs, max |diff| = {worst:.2e}")


# -- criterion 4: HQ reduces to Q without AIs --------------------------------

def test_criterion_04_reduction():
    rng = np.random.default_rng(4)
    worst = 0.0
    g = random_graph(rng, 40, 0.15, 0.0, weights=[1, 2])
    for _ in range(100):
        p = Partition.from_labels(g.node_ids, random_labels(rng, 40))
        worst = max(worst, abs(human_modularity_hq(g, p, ObjectiveKind.hq(1.0, 1.0, 1.0)) - modularity_q(g, p)))
    same = 0
    for seed in range(30):
        h = random_graph(np.random.default_rng(seed), int(rng.integers(10, 80)), 0.1, 0.0)
        if h.total_weight == 0:
            same += 1
            continue
        same += louvain(h, ObjectiveKind.hq(), seed) == louvain(h, ObjectiveKind.q(), seed)
    ok = worst <= 1e-12 and same == 30
    check(4, ok, f"max |HQ-Q| over 100 partitions = {worst:.1e}; louvain(HQ)==louvain(Q) on {same}/30 graphs")


# -- criteria 5-7: Cora-scale protocol ---------------------------------------

def _seed_job(job):
    h, labels, strategy, seed, methods = job
    gen = GenStrategyConfig(strategy, seed=seed)
    recs = run_seed(h, gen, EvolutionConfig(100, 4), methods, AnnealConfig(), labels)
    return {r.method: (r.report.q, r.report.hq) for r in recs}


def run_protocol(h, labels, strategy, methods, seeds=CORA_SEEDS):
    jobs = [(h, labels, strategy, s, methods) for s in range(seeds)]
    if WORKERS > 1:
        with ProcessPoolExecutor(WORKERS) as ex:
            return list(ex.map(_seed_job, jobs))
    return [_seed_job(j) for j in jobs]


_cache: dict = {}


def cora_table1():
    if "t1" not in _cache:
        data = load_cora()
        if data is None:
            _cache["t1"] = None
        else:
            t0 = time.perf_counter()
            runs = run_protocol(data.graph, data.labels, Strategy.RANDOM, ("cusa", "louvain-n", "louvain-a"))
            _cache["t1"] = (data, runs, time.perf_counter() - t0)
    return _cache["t1"]


def missing_cora(n):
    msg = f"Cora dataset not found under {cora_dir()} (cora.cites / cora.content); criterion not evaluated"
    record(n, False, msg)
    pytest.fail(msg)


def test_criterion_05_table1_cora():
    res = cora_table1()
    if res is None:
        missing_cora(5)
    _, runs, seconds = res
    mean = lambda m, k: float(np.mean([r[m][k] for r in runs]))
    qa, hqa, hqn, hqc = mean("louvain-a", 0), mean("louvain-a", 1), mean("louvain-n", 1), mean("cusa", 1)
    wins = sum(r["cusa"][1] >= r["louvain-n"][1] for r in runs) / len(runs)
    ok = (0.79 <= qa <= 0.84 and hqn < hqa and 0.77 <= hqc <= 0.87 and wins >= 0.8 and seconds < 600)
    check(5, ok, f"{len(runs)} seeds: louvain-a Q={qa:.4f}, louvain-n HQ={hqn:.4f} < louvain-a HQ={hqa:.4f}, "
                 f"CUSA HQ={hqc:.4f}, CUSA>=louvain-n in {wins:.0%}, {seconds:.0f}s on {WORKERS} worker(s)")


def test_criterion_06_strategy_trend():
    res = cora_table1()
    if res is None:
        missing_cora(6)
    data, runs, _ = res
    base = float(np.mean([r["cusa"][1] for r in runs]))
    means = {}
    for s in (Strategy.INVERSE_DEGREE, Strategy.INTRO_EXTRO, Strategy.DUAL):
        means[s.value] = float(np.mean([r["cusa"][1] for r in
                                        run_protocol(data.graph, data.labels, s, ("cusa",))]))
    ok = all(v >= base - 0.01 for v in means.values())
    detail = ", ".join(f"s{k}={v:.4f}" for k, v in means.items())
    check(6, ok, f"mean CUSA HQ strategy 1={base:.4f}; {detail}")


def _er_job(seed):
    h = gen_er_graph(2708, 5429, seed)
    g = synthesize(h, GenStrategyConfig(Strategy.RANDOM, seed=seed), EvolutionConfig(100, 4))
    res = cusa_run(g, AnnealConfig(seed=seed))
    return modularity_q(res.graph, res.partition)


def test_criterion_07_er_control():
    if WORKERS > 1:
        with ProcessPoolExecutor(WORKERS) as ex:
            qs = list(ex.map(_er_job, range(ER_SEEDS)))
    else:
        qs = [_er_job(s) for s in range(ER_SEEDS)]
    q_er = float(np.mean(qs))
    in_band = 0.40 <= q_er <= 0.60
    res = cora_table1()
    if res is None:
        detail = (f"ER CUSA Q={q_er:.4f} over {ER_SEEDS} seeds (band [0.40, 0.60] "
                  f"{'met' if in_band else 'missed'}); Cora comparison not evaluated: dataset not found under {cora_dir()}")
        record(7, False, detail)
        pytest.fail(detail)
    _, runs, _ = res
    q_cora = float(np.mean([r["cusa"][0] for r in runs]))
    ok = in_band and q_cora - q_er >= 0.25
    check(7, ok, f"ER CUSA Q={q_er:.4f}, Cora CUSA Q={q_cora:.4f}, gap={q_cora - q_er:.4f}")


# -- criterion 8: louvain-a bookkeeping --------------------------------------

def test_criterion_08_louvain_a_zero_migration():
    cases = bad = 0
    for seed in range(24):
        h, labels = planted_graph(seed, 300, 800, groups=5)
        strategy = list(Strategy)[seed % 4]
        gen = GenStrategyConfig(strategy, x=0.05, y=0.005, seed=seed)
        for rec in run_seed(h, gen, EvolutionConfig(10, 2), ("louvain-a",), AnnealConfig(), labels):
            cases += 1
            bad += not (rec.report.hmr == 0.0 and rec.report.adm == 0.0)
    check(8, bad == 0, f"louvain-a HMR=0 and ADM=0 exactly in {cases - bad}/{cases} runs (all four strategies)")


# -- criterion 9: scaling in |E| ---------------------------------------------

def test_criterion_09_scaling():
    sizes = [10_000, 50_000, 100_000, 200_000]
    rows = run_bench(sizes, n_nodes=1000, n_ai=20, iterations=4, seed=0, repeats=1)
    slope = power_law_exponent(sizes, [r["seconds"] for r in rows])
    times = ", ".join(f"{r['edges']}:{r['seconds']:.2f}s" for r in rows)
    check(9, slope <= 1.3, f"cusa_run wall time exponent in |E| = {slope:.3f} (|V|=1000, 20 AI, 4 iterations; {times})")


# -- criterion 10: determinism of every subcommand ---------------------------

def _cli(*args):
    out = subprocess.run([sys.executable, "-m", "metacd.cli", *map(str, args)], capture_output=True, text=True)
    assert out.returncode == 0, out.stderr
    return out


def test_criterion_10_determinism(tmp_path):
    h, labels = planted_graph(1, 250, 700, groups=4)
    (tmp_path / "e.txt").write_text("".join(f"{u} {v}\n" for u, v, _ in h.edges()))
    (tmp_path / "l.txt").write_text("".join(f"{k} c{v}\n" for k, v in labels.items()))
    (tmp_path / "sweep.json").write_text(
        '{"input": "e.txt", "labels": "l.txt", "strategies": [1, 3], "methods": ["cusa", "louvain-a"], '
        '"t_min": 0.2}')
    compared = []
    for run in ("a", "b"):
        d = tmp_path / run
        d.mkdir()
        _cli("synth", "--input", tmp_path / "e.txt", "--labels", tmp_path / "l.txt", "--strategy", 3,
             "--seed", 9, "--out", d / "g.hasn")
        for m in ("cusa", "louvain-n", "louvain-a"):
            _cli("cluster", "--input", d / "g.hasn", "--method", m, "--seed", 9, "--t-min", 0.05,
                 "--out", d / f"{m}.json", "--trace", d / f"{m}.csv")
        _cli("eval", "--input", d / "g.hasn", "--partition", d / "cusa.json", "--reference",
             d / "louvain-a.json", "--out", d / "report.json")
        _cli("sweep", "--config", tmp_path / "sweep.json", "--seeds", 2, "--out", d / "sweep")
    names = ["g.hasn", "report.json", "sweep/runs.csv", "sweep/summary.csv"]
    names += [f"{m}.{ext}" for m in ("cusa", "louvain-n", "louvain-a") for ext in ("json", "csv")]
    for name in names:
        compared.append((tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes())
    ok = all(compared)
    check(10, ok, f"{sum(compared)}/{len(compared)} output files byte-identical across repeated "
                  "synth/cluster/eval/sweep runs (bench output holds wall times and is excluded)")


# -- criterion 11: termination bound ------------------------------------------

def test_criterion_11_termination():
    cfg = AnnealConfig()
    worst = 0.0
    cases = 0
    for seed in range(12):
        rng = np.random.default_rng(seed)
        # AI counts on both sides of the 135-step schedule
        n = [60, 200, 500][seed % 3]
        g = random_graph(rng, n, 3.0 / n, [0.1, 0.3, 0.6][seed % 3], connected=True)
        if g.ai_count == 0:
            continue
        res = cusa_run(g, AnnealConfig(seed=seed))
        bound = termination_bound(g.ai_count, cfg)
        worst = max(worst, len(res.trace) / bound)
        cases += 1
        assert len(res.trace) <= bound
    check(11, worst <= 1.0, f"trace length <= max(|AI|, ceil(log(t_min/t_initial)/log c)) on {cases} inputs "
                            f"(largest ratio {worst:.2f})")


# -- supporting evidence without Cora ----------------------------------------

@pytest.mark.slow
def test_surrogate_table1_protocol():
    """Criterion-5 protocol on a Cora-sized planted-partition graph (not a substitute for Cora)."""
    h, labels = planted_graph(0, 2708, 5429, groups=7)
    runs = [_seed_job((h, labels, Strategy.RANDOM, s, ("cusa", "louvain-n", "louvain-a"))) for s in range(3)]
    mean = lambda m, k: float(np.mean([r[m][k] for r in runs]))
    print(f"surrogate: louvain-a Q={mean('louvain-a', 0):.4f} HQ={mean('louvain-a', 1):.4f}; "
          f"louvain-n HQ={mean('louvain-n', 1):.4f}; CUSA Q={mean('cusa', 0):.4f} HQ={mean('cusa', 1):.4f}")
    assert all(r["cusa"][1] >= r["louvain-n"][1] for r in runs)
    assert all(math.isfinite(r["cusa"][1]) for r in runs)
