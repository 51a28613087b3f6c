"""Parse the classic Planetoid raw file format (ind.<name>.*).

Eight files per dataset: pickled scipy/numpy objects ``x``, ``y``, ``tx``,
``ty``, ``allx``, ``ally``, a ``graph`` adjacency dict, and a plain-text
``test.index``. Node order is [allx | test block], with the test block
re-shuffled according to test.index; citeseer's test index has gaps that are
padded with zero feature/label rows. The public split is: first len(y) nodes
train, the next 500 validation, the test.index nodes test.
"""

from __future__ import annotations

import pickle
import urllib.error
import urllib.request
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

PLANETOID_NAMES = ("cora", "citeseer", "pubmed")
PIECES = ("x", "y", "tx", "ty", "allx", "ally", "graph", "test.index")
MIRROR = "https://github.com/kimiyoung/planetoid/raw/master/data"


class ExportError(Exception):
    """Dataset cannot be located, downloaded, or parsed."""


@dataclass
class LoadedDataset:
    name: str
    features: np.ndarray      # (N, F) float32
    labels: np.ndarray        # (N,) int64
    edges: np.ndarray         # raw directed pairs as listed by the source
    train_idx: np.ndarray
    val_idx: np.ndarray
    test_idx: np.ndarray
    split_policy: str


def _read_pickle(path: Path):
    with path.open("rb") as fh:
        return pickle.load(fh, encoding="latin1")


def _parse_index(path: Path) -> np.ndarray:
    return np.array([int(line) for line in path.read_text().split()], dtype=np.int64)


def fetch_raw_files(name: str, raw_dir: Path, download: bool = True) -> None:
    """Ensure all eight raw files exist in raw_dir, downloading missing ones."""
    raw_dir.mkdir(parents=True, exist_ok=True)
    for piece in PIECES:
        target = raw_dir / f"ind.{name}.{piece}"
        if target.is_file():
            continue
        if not download:
            raise ExportError(f"missing raw file {target} and downloads are disabled")
        url = f"{MIRROR}/ind.{name}.{piece}"
        try:
            with urllib.request.urlopen(url, timeout=30) as resp:
                target.write_bytes(resp.read())
        except (urllib.error.URLError, OSError, TimeoutError) as e:
            raise ExportError(f"could not download {url}: {e}") from e


def load_planetoid(name: str, raw_dir: Path) -> LoadedDataset:
    """Assemble node features, labels, edges and the public split."""
    try:
        x = _read_pickle(raw_dir / f"ind.{name}.x")  # noqa: F841  (kept for format sanity)
        y = _read_pickle(raw_dir / f"ind.{name}.y")
        tx = _read_pickle(raw_dir / f"ind.{name}.tx")
        ty = _read_pickle(raw_dir / f"ind.{name}.ty")
        allx = _read_pickle(raw_dir / f"ind.{name}.allx")
        ally = _read_pickle(raw_dir / f"ind.{name}.ally")
        graph = _read_pickle(raw_dir / f"ind.{name}.graph")
        test_idx = _parse_index(raw_dir / f"ind.{name}.test.index")
    except (OSError, pickle.UnpicklingError, ValueError) as e:
        raise ExportError(f"failed to read raw files for {name!r} in {raw_dir}: {e}") from e

    test_sorted = np.sort(test_idx)
    if name == "citeseer":
        # pad the gaps in the test index range with zero rows
        full = np.arange(test_sorted.min(), test_sorted.max() + 1)
        tx_ext = sp.lil_matrix((len(full), tx.shape[1]), dtype=np.float32)
        tx_ext[test_sorted - test_sorted.min(), :] = tx
        tx = tx_ext
        ty_ext = np.zeros((len(full), ty.shape[1]), dtype=ty.dtype)
        ty_ext[test_sorted - test_sorted.min(), :] = ty
        ty = ty_ext

    features = sp.vstack((allx, tx)).tolil()
    features[test_idx, :] = features[test_sorted, :]
    features = np.asarray(features.todense(), dtype=np.float32)

    onehot = np.vstack((np.asarray(ally), np.asarray(ty)))
    onehot[test_idx, :] = onehot[test_sorted, :]
    labels = onehot.argmax(axis=1).astype(np.int64)

    pairs = []
    for u, neighbors in graph.items():
        for v in neighbors:
            pairs.append((u, v))
    edges = np.array(pairs, dtype=np.int64).reshape(-1, 2)

    n = features.shape[0]
    if labels.shape[0] != n or (edges.size and edges.max() >= n):
        raise ExportError(f"inconsistent raw data for {name!r}: {n} nodes")

    train_idx = np.arange(len(y), dtype=np.int64)
    val_idx = np.arange(len(y), len(y) + 500, dtype=np.int64)
    return LoadedDataset(name, features, labels, edges, train_idx, val_idx,
                         test_sorted.astype(np.int64), split_policy="planetoid-public")
