"""Quantify how far stored history rows have drifted from the embeddings the
current parameters would produce.

Staleness of layer l is the per-node L2 distance between the stored row and
the frozen-parameter full-graph activation of that layer; layer 0 stores the
input features, so its staleness is identically zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph
from .history import HistoryStore
from .linalg import CsrMatrix
from .model import ModelParams, forward_full


@dataclass(frozen=True)
class StalenessReport:
    """Per-layer (max, mean) L2 row distances between history and fresh activations."""

    max_per_layer: tuple[float, ...]
    mean_per_layer: tuple[float, ...]

    @property
    def num_layers(self) -> int:
        return len(self.max_per_layer)

    def __str__(self) -> str:
        pairs = ", ".join(
            f"l{i}: max={mx:.3e} mean={mn:.3e}"
            for i, (mx, mn) in enumerate(zip(self.max_per_layer, self.mean_per_layer))
        )
        return f"StalenessReport({pairs})"


def _row_distances(stored: np.ndarray, fresh: np.ndarray) -> tuple[float, float]:
    d = np.linalg.norm(stored.astype(np.float64) - fresh.astype(np.float64), axis=1)
    return float(d.max()), float(d.mean())


def staleness_from_activations(store: HistoryStore, activations: list[np.ndarray]) -> StalenessReport:
    """Compare the store against externally computed per-layer activations."""
    if len(activations) != store.num_layers:
        raise ValueError(f"expected {store.num_layers} activation matrices, got {len(activations)}")
    maxes, means = [], []
    for layer, fresh in enumerate(activations):
        mx, mn = _row_distances(store.layer(layer), fresh)
        maxes.append(mx)
        means.append(mn)
    return StalenessReport(tuple(maxes), tuple(means))


def measure_staleness(params: ModelParams, g: Graph, norm: CsrMatrix, store: HistoryStore) -> StalenessReport:
    """Frozen-parameter full-graph activations vs. the store's contents."""
    _, tape = forward_full(params, norm, g.features, track=True)
    return staleness_from_activations(store, [g.features, tape.h1])
