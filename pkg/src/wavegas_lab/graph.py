"""Graph container, GCN adjacency normalization, and the on-disk dataset format.

A dataset directory holds five files:

* ``meta.json``     — ``{"num_nodes": N, "num_edges": E, "num_features": F, "num_classes": C}``
                      where E counts undirected edges
* ``edges.txt``     — one ``u v`` pair per line, 0-based, each undirected edge once
* ``features.bin``  — N x F little-endian float32, row-major
* ``labels.txt``    — one integer per line, N lines
* ``splits.json``   — ``{"train": [...], "val": [...], "test": [...]}`` 0-based node indices
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .linalg import DTYPE, CsrMatrix


class DatasetError(Exception):
    """A dataset directory is missing, malformed, or inconsistent."""


@dataclass(frozen=True)
class Graph:
    """Immutable graph with node features, labels and train/val/test splits.

    ``adjacency`` is unweighted (all values 1), symmetric and free of
    self-loops; ``num_edges`` counts undirected edges, so adjacency.nnz equals
    2 * num_edges.
    """

    num_nodes: int
    num_edges: int
    adjacency: CsrMatrix
    features: np.ndarray
    labels: np.ndarray
    train_idx: np.ndarray
    val_idx: np.ndarray
    test_idx: np.ndarray

    @property
    def num_features(self) -> int:
        return self.features.shape[1]

    @property
    def num_classes(self) -> int:
        return int(self.labels.max()) + 1 if self.labels.size else 0

    def neighbors(self, v: int) -> np.ndarray:
        lo, hi = self.adjacency.row_ptr[v], self.adjacency.row_ptr[v + 1]
        return self.adjacency.col_idx[lo:hi]

    def splits(self) -> dict[str, np.ndarray]:
        return {"train": self.train_idx, "val": self.val_idx, "test": self.test_idx}


def _symmetrize_edges(num_nodes: int, edges: np.ndarray, warn_self_loops: bool = True) -> np.ndarray:
    """Directed/duplicated edge pairs -> unique undirected pairs (u < v)."""
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if edges.size and (edges.min() < 0 or edges.max() >= num_nodes):
        raise DatasetError(f"edge endpoint out of range [0, {num_nodes})")
    loops = edges[:, 0] == edges[:, 1]
    if loops.any():
        if warn_self_loops:
            warnings.warn(f"dropping {int(loops.sum())} self-loop(s) from edge list", stacklevel=3)
        edges = edges[~loops]
    lo = np.minimum(edges[:, 0], edges[:, 1])
    hi = np.maximum(edges[:, 0], edges[:, 1])
    keys = np.unique(lo * num_nodes + hi)
    return np.stack([keys // num_nodes, keys % num_nodes], axis=1)


def build_graph(num_nodes, edges, features, labels, train_idx, val_idx, test_idx) -> Graph:
    """Assemble a Graph from a raw (possibly directed/duplicated) edge list."""
    und = _symmetrize_edges(num_nodes, edges)
    both = np.concatenate([und, und[:, ::-1]], axis=0) if und.size else und.reshape(0, 2)
    adjacency = CsrMatrix.from_coo(
        num_nodes, num_nodes, both[:, 0], both[:, 1], np.ones(len(both), dtype=np.float64)
    )
    features = np.ascontiguousarray(features, dtype=DTYPE)
    labels = np.ascontiguousarray(labels, dtype=np.int64)
    if features.shape[0] != num_nodes:
        raise DatasetError(f"features have {features.shape[0]} rows, expected {num_nodes}")
    if labels.shape != (num_nodes,):
        raise DatasetError(f"labels have shape {labels.shape}, expected ({num_nodes},)")
    splits = [np.ascontiguousarray(s, dtype=np.int64) for s in (train_idx, val_idx, test_idx)]
    seen = np.concatenate(splits) if any(s.size for s in splits) else np.zeros(0, dtype=np.int64)
    if seen.size and (seen.min() < 0 or seen.max() >= num_nodes):
        raise DatasetError("split index out of range")
    if len(np.unique(seen)) != len(seen):
        raise DatasetError("train/val/test splits overlap")
    return Graph(num_nodes, len(und), adjacency, features, labels, *splits)


def gcn_normalize(g: Graph) -> CsrMatrix:
    """Symmetrically normalized adjacency with self-loops.

    Entry (v, w) = 1/sqrt((deg(v)+1) * (deg(w)+1)) for w in N(v) or w == v.
    """
    n = g.num_nodes
    deg = np.diff(g.adjacency.row_ptr).astype(np.float64)
    inv_sqrt = 1.0 / np.sqrt(deg + 1.0)
    rows = np.repeat(np.arange(n), np.diff(g.adjacency.row_ptr))
    cols = g.adjacency.col_idx.astype(np.int64)
    all_rows = np.concatenate([rows, np.arange(n)])
    all_cols = np.concatenate([cols, np.arange(n)])
    vals = inv_sqrt[all_rows] * inv_sqrt[all_cols]
    return CsrMatrix.from_coo(n, n, all_rows, all_cols, vals)


def save_dataset(g: Graph, out_dir) -> None:
    """Write `g` in the dataset directory format (bit-exact round-trip)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    meta = {
        "num_nodes": g.num_nodes,
        "num_edges": g.num_edges,
        "num_features": g.num_features,
        "num_classes": g.num_classes,
    }
    (out / "meta.json").write_text(json.dumps(meta, indent=1) + "\n")
    adj = g.adjacency
    lines = []
    for u in range(g.num_nodes):
        for w in adj.col_idx[adj.row_ptr[u]:adj.row_ptr[u + 1]]:
            if u < w:
                lines.append(f"{u} {w}\n")
    (out / "edges.txt").write_text("".join(lines))
    (out / "features.bin").write_bytes(np.ascontiguousarray(g.features, dtype="<f4").tobytes())
    (out / "labels.txt").write_text("".join(f"{int(c)}\n" for c in g.labels))
    splits = {k: [int(i) for i in v] for k, v in g.splits().items()}
    (out / "splits.json").write_text(json.dumps(splits) + "\n")


def load_dataset(dataset_dir) -> Graph:
    """Load a dataset directory, validating counts against meta.json."""
    d = Path(dataset_dir)
    for name in ("meta.json", "edges.txt", "features.bin", "labels.txt", "splits.json"):
        if not (d / name).is_file():
            raise DatasetError(f"missing {name} in {d}")
    try:
        meta = json.loads((d / "meta.json").read_text())
        n = int(meta["num_nodes"])
        num_edges = int(meta["num_edges"])
        num_features = int(meta["num_features"])
        num_classes = int(meta["num_classes"])
    except (KeyError, ValueError, json.JSONDecodeError) as e:
        raise DatasetError(f"malformed meta.json in {d}: {e}") from e

    text = (d / "edges.txt").read_text().split()
    if len(text) % 2:
        raise DatasetError("edges.txt has an odd number of tokens")
    edges = np.array(text, dtype=np.int64).reshape(-1, 2) if text else np.zeros((0, 2), dtype=np.int64)

    raw = (d / "features.bin").read_bytes()
    expected = n * num_features * 4
    if len(raw) != expected:
        raise DatasetError(f"features.bin is {len(raw)} bytes, expected {expected} ({n}x{num_features} float32)")
    features = np.frombuffer(raw, dtype="<f4").reshape(n, num_features)

    labels = np.array((d / "labels.txt").read_text().split(), dtype=np.int64)
    if labels.shape != (n,):
        raise DatasetError(f"labels.txt has {labels.size} entries, expected {n}")
    if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
        raise DatasetError(f"label out of range [0, {num_classes})")

    try:
        splits = json.loads((d / "splits.json").read_text())
        parts = [np.asarray(splits[k], dtype=np.int64) for k in ("train", "val", "test")]
    except (KeyError, ValueError, json.JSONDecodeError) as e:
        raise DatasetError(f"malformed splits.json in {d}: {e}") from e

    g = build_graph(n, edges, features, labels, *parts)
    if g.num_edges != num_edges:
        raise DatasetError(
            f"meta.json claims {num_edges} undirected edges but edges.txt yields {g.num_edges}"
        )
    return g


def synth_sbm(blocks: int, nodes_per_block: int, p_in: float, p_out: float,
              num_features: int, num_classes: int, seed: int) -> Graph:
    """Stochastic-block-model graph with block-correlated Gaussian features.

    Labels are block id mod num_classes; the node order is grouped by block.
    Splits are a seeded 60/20/20 shuffle. Deterministic for a fixed seed.
    """
    if not (0.0 <= p_out <= p_in <= 1.0):
        raise ValueError(f"need 0 <= p_out <= p_in <= 1, got p_in={p_in}, p_out={p_out}")
    if num_classes < 1 or num_classes > blocks:
        raise ValueError("num_classes must be in [1, blocks]")
    rng = np.random.default_rng(seed)
    n = blocks * nodes_per_block
    block_of = np.repeat(np.arange(blocks), nodes_per_block)

    iu, ju = np.triu_indices(n, k=1)
    p = np.where(block_of[iu] == block_of[ju], p_in, p_out)
    keep = rng.random(len(p)) < p
    edges = np.stack([iu[keep], ju[keep]], axis=1)

    means = rng.normal(0.0, 1.0, size=(blocks, num_features))
    features = means[block_of] + rng.normal(0.0, 1.0, size=(n, num_features))
    labels = block_of % num_classes

    perm = rng.permutation(n)
    n_train = int(round(0.6 * n))
    n_val = int(round(0.2 * n))
    train_idx = np.sort(perm[:n_train])
    val_idx = np.sort(perm[n_train:n_train + n_val])
    test_idx = np.sort(perm[n_train + n_val:])
    return build_graph(n, edges, features.astype(DTYPE), labels, train_idx, val_idx, test_idx)
