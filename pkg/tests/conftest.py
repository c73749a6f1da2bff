import os
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from metacd.graph import HasnGraph  # noqa: E402

ROOT = Path(__file__).resolve().parents[1]


def random_graph(rng, n, p=0.3, ai_frac=0.0, weights=None, connected=False):
    """G(n, p) with optional AI marks and weights drawn from ``weights``."""
    while True:
        iu, iv = np.triu_indices(n, 1)
        keep = rng.random(len(iu)) < p
        u, v = iu[keep], iv[keep]
        if connected and n > 1:
            # thread a random spanning path through the nodes
            perm = rng.permutation(n)
            pu, pv = np.minimum(perm[:-1], perm[1:]), np.maximum(perm[:-1], perm[1:])
            keys = np.unique(np.concatenate([u * n + v, pu * n + pv]))
            u, v = keys // n, keys % n
        w = None if weights is None else rng.choice(np.asarray(weights, float), size=len(u))
        is_ai = rng.random(n) < ai_frac
        return HasnGraph.from_arrays(np.arange(n), is_ai, u, v, w)


def planted_graph(seed, n, m, groups=7, p_out=0.2):
    """Unit-weight human graph with ``groups`` planted communities.

    Node pairs are proposed uniformly and cross-group pairs are kept with
    probability ``p_out``; returns the graph and the planted labels.
    """
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, groups, n)
    keys = set()
    while len(keys) < m:
        a, b = rng.integers(0, n, 2)
        if a == b or (labels[a] != labels[b] and rng.random() > p_out):
            continue
        keys.add((min(a, b), max(a, b)))
    u, v = zip(*sorted(keys))
    g = HasnGraph.from_arrays(np.arange(n), np.zeros(n, bool), u, v)
    return g, {i: int(labels[i]) for i in range(n)}


def random_labels(rng, n, k=None):
    k = int(rng.integers(1, n + 1)) if k is None else k
    return rng.integers(0, k, n)


def cora_dir() -> Path:
    return Path(os.environ.get("METACD_CORA_DIR", ROOT / "data" / "cora"))


def load_cora():
    """Cora edge list and class labels, or None when the files are absent."""
    from metacd.io import load_edge_list

    d = cora_dir()
    cites, content = d / "cora.cites", d / "cora.content"
    if not cites.exists():
        return None
    return load_edge_list(cites, content if content.exists() else None)


@pytest.fixture(scope="session")
def cora():
    data = load_cora()
    if data is None:
        pytest.skip(f"Cora files not found under {cora_dir()} (set METACD_CORA_DIR)")
    return data


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance lines collected by tests/test_acceptance.py
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])
