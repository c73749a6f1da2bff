"""Independent reference implementations used as test oracles.

Everything here is deliberately naive: explicit double sums, exhaustive
enumeration and exact rational arithmetic, sharing no code with the package
beyond reading graph arrays.
"""
from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np


def dense_adjacency(g) -> np.ndarray:
    n = g.n_nodes
    A = np.zeros((n, n))
    for i in range(n):
        for e in range(g.indptr[i], g.indptr[i + 1]):
            A[i, g.indices[e]] = g.weights[e]
        A[i, i] += 2.0 * g.self_loops[i]
    return A


def q_double_sum(g, labels, weights_per_node=None) -> float:
    """(1/2m) sum_C w(C) sum_{p,q in C} (A_pq - d_p d_q / 2m), diagonal included."""
    A = dense_adjacency(g)
    d = A.sum(axis=1)
    m2 = d.sum()
    total = 0.0
    for c in np.unique(labels):
        members = np.flatnonzero(labels == c)
        s = 0.0
        for p in members:
            for q in members:
                s += A[p, q] - d[p] * d[q] / m2
        w = 1.0 if weights_per_node is None else weights_per_node(members)
        total += w * s
    return total / m2


def hq_double_sum(g, labels, alpha=1.0, beta=1.0, gamma=1.0) -> float:
    def w(members):
        h = int(g.humans[members].sum())
        a = int(g.ais[members].sum())
        return alpha * (beta * h - gamma * a) / (h + a)
    return q_double_sum(g, labels, w)


def all_partitions(items):
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in all_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def best_q_exhaustive(g) -> float:
    best = -np.inf
    for part in all_partitions(range(g.n_nodes)):
        labels = np.empty(g.n_nodes, dtype=np.int64)
        for c, members in enumerate(part):
            labels[members] = c
        best = max(best, q_double_sum(g, labels))
    return best


def _exact_lengths(g):
    n = g.n_nodes
    L = [[None] * n for _ in range(n)]
    for i in range(n):
        for e in range(g.indptr[i], g.indptr[i + 1]):
            # exact rational of the float weight, then its exact reciprocal
            L[i][g.indices[e]] = 1 / Fraction(float(g.weights[e]))
    return L


def betweenness_bruteforce(g) -> list[Fraction]:
    """Exact betweenness by Floyd-Warshall in rationals and explicit path enumeration."""
    n = g.n_nodes
    L = _exact_lengths(g)
    INF = None
    D = [[Fraction(0) if i == j else L[i][j] for j in range(n)] for i in range(n)]
    for k in range(n):
        for i in range(n):
            if D[i][k] is INF:
                continue
            for j in range(n):
                if D[k][j] is INF:
                    continue
                cand = D[i][k] + D[k][j]
                if D[i][j] is INF or cand < D[i][j]:
                    D[i][j] = cand

    def paths(s, t):
        # every shortest s-t path, walked along tight edges
        if s == t:
            return [[s]]
        out = []
        for v in range(n):
            if L[s][v] is not None and D[v][t] is not None and L[s][v] + D[v][t] == D[s][t]:
                out.extend([s] + p for p in paths(v, t))
        return out

    bc = [Fraction(0)] * n
    for s, t in itertools.combinations(range(n), 2):
        if D[s][t] is INF:
            continue
        ps = paths(s, t)
        for p in ps:
            for v in p[1:-1]:
                bc[v] += Fraction(1, len(ps))
    return bc
