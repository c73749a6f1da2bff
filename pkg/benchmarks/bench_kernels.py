"""Compiled (numba) vs interpreted kernels.

Times each hot kernel through its compiled entry point and through
``kernel.py_func`` on the same inputs, then a short end-to-end CUSA run in
two subprocesses, one with ``METACD_NUMBA=0``.

    python3 benchmarks/bench_kernels.py --nodes 600 --edges 2400
"""
import argparse
import os
import subprocess
import sys
import time

import numpy as np

from metacd import _accel
from metacd.cli import bench_graph
from metacd.louvain import _local_moves
from metacd.scoring import (_brandes_buckets, _ec_kernel, _edge_common, _edge_distances,
                            reweight_edges)
from metacd.synthesis import _jaccard_candidates

E2E = """
import time
from metacd import _accel
from metacd.cli import bench_graph
from metacd.cusa import AnnealConfig, cusa_run
g = bench_graph({n}, {m}, {ai}, 0)
cusa_run(bench_graph(40, 120, 4, 1), AnnealConfig(max_iterations=2))
t = time.perf_counter()
cusa_run(g, AnnealConfig(max_iterations={it}))
print(_accel.backend_name(), time.perf_counter() - t)
"""


def best_of(fn, args, repeats):
    fn(*args)  # warm-up / compile
    best = float("inf")
    for _ in range(repeats):
        t = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t)
    return best


def kernel_cases(g):
    h = reweight_edges(g)
    lengths, _ = _edge_distances(h.weights)
    lengths = lengths.astype(np.int64)
    u, v, _ = g.edge_arrays()
    n = g.n_nodes
    comm = np.arange(n, dtype=np.int64)
    k = g.degrees
    order = np.random.default_rng(0).permutation(n).astype(np.int64)

    def local_moves(fn):
        # fresh state each call so every run does the same work
        def run():
            fn(g.indptr, g.indices, g.weights, g.self_loops, k, g.humans, g.ais, comm.copy(), order,
               g.total_weight, True, 1.0, 1.0, 1.0, 1e-10)
        return run

    return [
        ("eigenvector", _ec_kernel, (h.indptr, h.indices, h.weights, 1e-8, 1000)),
        ("betweenness", _brandes_buckets, (h.indptr, h.indices, lengths, int(lengths.max()) + 1)),
        ("triangles", _edge_common, (g.indptr, g.indices, u, v)),
        ("jaccard", _jaccard_candidates, (g.indptr, g.indices)),
        ("louvain pass", local_moves, None),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", type=int, default=600)
    ap.add_argument("--edges", type=int, default=2400)
    ap.add_argument("--ai", type=int, default=30)
    ap.add_argument("--iterations", type=int, default=3)
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--skip-e2e", action="store_true")
    a = ap.parse_args()
    if not _accel.NUMBA_ENABLED:
        sys.exit("numba backend is disabled (METACD_NUMBA=0); nothing to compare")

    g = bench_graph(a.nodes, a.edges, a.ai, 0)
    print(f"graph: {g.n_nodes} nodes, {g.edge_count} edges, {g.ai_count} AI")
    print(f"{'kernel':<14}{'numba s':>12}{'python s':>12}{'speedup':>10}")
    for name, fn, args in kernel_cases(g):
        if args is None:
            fast, slow = fn(_local_moves), fn(_local_moves.py_func)
            t_fast, t_slow = best_of(fast, (), a.repeats), best_of(slow, (), 1)
        else:
            t_fast, t_slow = best_of(fn, args, a.repeats), best_of(fn.py_func, args, 1)
        print(f"{name:<14}{t_fast:>12.4f}{t_slow:>12.4f}{t_slow / t_fast:>9.1f}x")

    if a.skip_e2e:
        return
    code = E2E.format(n=a.nodes, m=a.edges, ai=a.ai, it=a.iterations)
    times = {}
    for flag in ("1", "0"):
        env = dict(os.environ, METACD_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        backend, seconds = out.stdout.split()
        times[backend] = float(seconds)
    print(f"cusa_run ({a.iterations} iterations): numba {times['numba']:.3f}s, "
          f"python {times['python']:.3f}s, {times['python'] / times['numba']:.1f}x")


if __name__ == "__main__":
    main()
