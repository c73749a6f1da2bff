"""File formats: raw edge lists, the ``#hasn v1`` graph format, partitions,
traces and run manifests."""
from __future__ import annotations

import datetime as _dt
import hashlib
import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .graph import GraphError, HasnGraph, NodeKind, Partition

HASN_HEADER = "#hasn v1"
PARTITION_FORMAT = "metacd-partition"


class FormatError(ValueError):
    pass


@dataclass
class EdgeList:
    """A parsed human-only network plus its label table."""

    graph: HasnGraph
    names: list                  # dense id -> original token
    labels: dict | None = None   # dense id -> class label
    duplicates: int = 0
    self_loops: int = 0

    @property
    def warnings(self) -> int:
        return self.duplicates + self.self_loops


def _tokens(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.strip()
            if not text or text.startswith("#") or text.startswith("%"):
                continue
            yield lineno, text.split()


def load_edge_list(path, labels_path=None) -> EdgeList:
    """Read ``u v`` pairs into an undirected, unit-weight, all-human graph.

    Node tokens get dense ids in order of first appearance (edge file first,
    then nodes only present in the labels file).  Repeated pairs in either
    direction and self-loops are dropped and counted.  The optional labels
    file holds ``node ... class`` rows; the first and last columns are used,
    so a Cora-style content file works as is.
    """
    index: dict[str, int] = {}
    names: list[str] = []

    def dense(tok):
        if tok not in index:
            index[tok] = len(names)
            names.append(tok)
        return index[tok]

    seen = set()
    us, vs = [], []
    dup = loops = 0
    for lineno, parts in _tokens(path):
        if len(parts) != 2:
            raise FormatError(f"{path}:{lineno}: expected 'u v', got {len(parts)} fields")
        a, b = dense(parts[0]), dense(parts[1])
        if a == b:
            loops += 1
            continue
        key = (a, b) if a < b else (b, a)
        if key in seen:
            dup += 1
            continue
        seen.add(key)
        us.append(key[0])
        vs.append(key[1])
    labels = None
    if labels_path is not None:
        labels = {}
        for lineno, parts in _tokens(labels_path):
            if len(parts) < 2:
                raise FormatError(f"{labels_path}:{lineno}: expected 'node class'")
            labels[dense(parts[0])] = parts[-1]
    if not names:
        raise FormatError(f"{path}: no nodes")
    n = len(names)
    g = HasnGraph.from_arrays(np.arange(n), np.zeros(n, dtype=bool), us, vs)
    return EdgeList(g, names, labels, dup, loops)


# -- HASN files ---------------------------------------------------------------

def dumps_hasn(g: HasnGraph) -> str:
    if np.any(g.self_loops):
        raise GraphError("aggregated graphs with self-loops cannot be saved")
    lines = [HASN_HEADER]
    kinds = np.where(g.is_ai, NodeKind.AI.value, NodeKind.HUMAN.value)
    lines.extend(f"N {int(i)} {k}" for i, k in zip(g.node_ids, kinds))
    lines.extend(f"E {u} {v} {w!r}" for u, v, w in g.edges())
    return "\n".join(lines) + "\n"


def save_hasn(g: HasnGraph, path) -> None:
    Path(path).write_text(dumps_hasn(g), encoding="utf-8")


def loads_hasn(text: str, source: str = "<string>") -> HasnGraph:
    from .graph import build_graph

    lines = text.splitlines()
    if not lines or lines[0].strip() != HASN_HEADER:
        got = lines[0].strip() if lines else ""
        raise FormatError(f"{source}: expected header {HASN_HEADER!r}, got {got!r}")
    kinds, edges = {}, []
    for lineno, line in enumerate(lines[1:], 2):
        parts = line.split()
        if not parts:
            continue
        try:
            if parts[0] == "N" and len(parts) == 3:
                node = int(parts[1])
                if node in kinds:
                    raise FormatError(f"{source}:{lineno}: node {node} listed twice")
                kinds[node] = NodeKind.parse(parts[2])
            elif parts[0] == "E" and len(parts) == 4:
                edges.append((int(parts[1]), int(parts[2]), float(parts[3])))
            else:
                raise FormatError(f"{source}:{lineno}: unrecognised record {line.strip()!r}")
        except (ValueError, GraphError) as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(f"{source}:{lineno}: {exc}") from exc
    try:
        return build_graph(edges, kinds)
    except GraphError as exc:
        raise FormatError(f"{source}: {exc}") from exc


def load_hasn(path) -> HasnGraph:
    return loads_hasn(Path(path).read_text(encoding="utf-8"), str(path))


# -- partitions ---------------------------------------------------------------

def partition_to_json(p: Partition, **extra) -> str:
    doc = {"format": PARTITION_FORMAT, "version": 1,
           "communities": {str(k): v for k, v in p.as_dict().items()}}
    for key, value in extra.items():
        if isinstance(value, np.ndarray):
            value = value.tolist()
        doc[key] = value
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def save_partition(p: Partition, path, **extra) -> None:
    Path(path).write_text(partition_to_json(p, **extra), encoding="utf-8")


def load_partition(path) -> tuple[Partition, dict]:
    """Partition plus the remaining top-level fields of the document."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not JSON ({exc})") from exc
    if doc.get("format") != PARTITION_FORMAT or "communities" not in doc:
        raise FormatError(f"{path}: not a partition file")
    p = Partition.from_mapping({int(k): int(v) for k, v in doc["communities"].items()})
    meta = {k: v for k, v in doc.items() if k not in ("format", "version", "communities")}
    return p, meta


# -- manifests ----------------------------------------------------------------

def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class RunManifest:
    command: str
    config: dict
    seed: int
    inputs: dict = field(default_factory=dict)    # path -> sha256
    outputs: dict = field(default_factory=dict)   # path -> sha256
    version: str = ""
    started: str = ""
    finished: str = ""

    @classmethod
    def start(cls, command: str, config: dict, seed: int, inputs=()) -> "RunManifest":
        from . import __version__

        digests = {str(p): sha256_file(p) for p in inputs if p is not None}
        return cls(command, config, seed, digests, {}, __version__, _now())

    def finish(self, outputs=()) -> "RunManifest":
        self.outputs = {str(p): sha256_file(p) for p in outputs if p is not None and os.path.exists(p)}
        self.finished = _now()
        return self

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "RunManifest":
        return cls(**json.loads(Path(path).read_text(encoding="utf-8")))


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
