"""Export public graph benchmark datasets to the neutral directory format.

The output directory contains meta.json, edges.txt (each undirected edge
once, no self-loops), features.bin (little-endian float32, row-major),
labels.txt, splits.json, and a manifest.json recording counts, split sizes,
both directed and undirected edge counts, and a checksum of features.bin.

Planetoid datasets (cora, citeseer, pubmed) load from raw files, downloading
them if needed. The co-purchase/co-author/wiki datasets additionally require
torch_geometric to be importable.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .raw import PLANETOID_NAMES, ExportError, LoadedDataset, fetch_raw_files, load_planetoid

PYG_NAMES = ("amazon-photo", "amazon-computers", "coauthor-cs", "coauthor-physics", "wikics")


@dataclass
class ExportManifest:
    dataset: str
    num_nodes: int
    num_edges: int            # undirected, as written to meta.json
    num_edges_directed_raw: int
    num_features: int
    num_classes: int
    split_sizes: dict
    split_policy: str
    features_sha256: str


def symmetrize(num_nodes: int, edges: np.ndarray) -> np.ndarray:
    """Raw directed pairs -> unique undirected pairs (u < v), loops dropped."""
    edges = edges[edges[:, 0] != edges[:, 1]]
    lo = np.minimum(edges[:, 0], edges[:, 1])
    hi = np.maximum(edges[:, 0], edges[:, 1])
    keys = np.unique(lo.astype(np.int64) * num_nodes + hi)
    return np.stack([keys // num_nodes, keys % num_nodes], axis=1)


def load_via_pyg(name: str, raw_root: Path, seed: int) -> LoadedDataset:
    try:
        import torch_geometric.datasets as pyg_datasets
    except ImportError as e:
        raise ExportError(
            f"dataset {name!r} needs torch_geometric, which is not installed"
        ) from e
    loaders = {
        "amazon-photo": lambda root: pyg_datasets.Amazon(root, "Photo"),
        "amazon-computers": lambda root: pyg_datasets.Amazon(root, "Computers"),
        "coauthor-cs": lambda root: pyg_datasets.Coauthor(root, "CS"),
        "coauthor-physics": lambda root: pyg_datasets.Coauthor(root, "Physics"),
        "wikics": lambda root: pyg_datasets.WikiCS(str(root)),
    }
    data = loaders[name](raw_root / name)[0]
    features = data.x.numpy().astype(np.float32)
    labels = data.y.numpy().astype(np.int64)
    edges = data.edge_index.numpy().T.astype(np.int64)
    n = features.shape[0]
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    n_train, n_val = int(round(0.6 * n)), int(round(0.2 * n))
    return LoadedDataset(name, features, labels, edges,
                         np.sort(perm[:n_train]), np.sort(perm[n_train:n_train + n_val]),
                         np.sort(perm[n_train + n_val:]), split_policy=f"seeded-60/20/20(seed={seed})")


def export_dataset(name: str, out_dir: Path, raw_root: Path,
                   download: bool = True, split_seed: int = 0) -> ExportManifest:
    name = name.lower()
    if name in PLANETOID_NAMES:
        fetch_raw_files(name, raw_root / name, download=download)
        ds = load_planetoid(name, raw_root / name)
    elif name in PYG_NAMES:
        ds = load_via_pyg(name, raw_root, split_seed)
    else:
        raise ExportError(
            f"unknown dataset {name!r}; known: {', '.join(PLANETOID_NAMES + PYG_NAMES)}"
        )

    n = ds.features.shape[0]
    undirected = symmetrize(n, ds.edges)
    num_classes = int(ds.labels.max()) + 1

    out_dir.mkdir(parents=True, exist_ok=True)
    meta = {
        "num_nodes": n,
        "num_edges": int(len(undirected)),
        "num_features": int(ds.features.shape[1]),
        "num_classes": num_classes,
    }
    (out_dir / "meta.json").write_text(json.dumps(meta, indent=1) + "\n")
    (out_dir / "edges.txt").write_text("".join(f"{u} {v}\n" for u, v in undirected))
    feature_bytes = np.ascontiguousarray(ds.features, dtype="<f4").tobytes()
    (out_dir / "features.bin").write_bytes(feature_bytes)
    (out_dir / "labels.txt").write_text("".join(f"{c}\n" for c in ds.labels))
    splits = {
        "train": [int(i) for i in ds.train_idx],
        "val": [int(i) for i in ds.val_idx],
        "test": [int(i) for i in ds.test_idx],
    }
    (out_dir / "splits.json").write_text(json.dumps(splits) + "\n")

    manifest = ExportManifest(
        dataset=name,
        num_nodes=n,
        num_edges=int(len(undirected)),
        num_edges_directed_raw=int(len(ds.edges)),
        num_features=int(ds.features.shape[1]),
        num_classes=num_classes,
        split_sizes={k: len(v) for k, v in splits.items()},
        split_policy=ds.split_policy,
        features_sha256=hashlib.sha256(feature_bytes).hexdigest(),
    )
    (out_dir / "manifest.json").write_text(json.dumps(asdict(manifest), indent=1) + "\n")
    return manifest


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="export.py", description="Export benchmark graph datasets to the neutral directory format."
    )
    parser.add_argument("--dataset", required=True,
                        help=f"one of: {', '.join(PLANETOID_NAMES + PYG_NAMES)}")
    parser.add_argument("--out", required=True, help="output dataset directory")
    parser.add_argument("--raw-dir", default=os.environ.get("PLANETOID_RAW_DIR", "raw"),
                        help="cache directory for raw source files")
    parser.add_argument("--no-download", action="store_true",
                        help="fail instead of downloading missing raw files")
    parser.add_argument("--split-seed", type=int, default=0,
                        help="seed for generated splits on datasets without canonical ones")
    args = parser.parse_args(argv)
    try:
        manifest = export_dataset(args.dataset, Path(args.out), Path(args.raw_dir),
                                  download=not args.no_download, split_seed=args.split_seed)
    except ExportError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    print(json.dumps(asdict(manifest), indent=1))
    return 0
