"""Per-layer historical node embeddings with push/pull access.

Layer 0 aliases the input features and is immutable; hidden layers start at
zero and are overwritten row-by-row as batches recompute their nodes. The
store's size is fixed at construction: refreshing embeddings more often never
grows it.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .linalg import DTYPE


class HistoryStore:
    """num_layers matrices of shape (num_nodes, dim_l); layer 0 is the features."""

    def __init__(self, features: np.ndarray, hidden_dims: list[int]):
        base = np.ascontiguousarray(features, dtype=DTYPE).copy()
        base.setflags(write=False)
        self._layers = [base]
        for dim in hidden_dims:
            self._layers.append(np.zeros((base.shape[0], dim), dtype=DTYPE))

    @property
    def num_layers(self) -> int:
        return len(self._layers)

    @property
    def num_nodes(self) -> int:
        return self._layers[0].shape[0]

    def dims(self) -> list[int]:
        return [layer.shape[1] for layer in self._layers]

    def nbytes(self) -> int:
        return sum(layer.nbytes for layer in self._layers)

    def layer(self, layer: int) -> np.ndarray:
        """Read-only view of a whole layer."""
        self._check_layer(layer)
        view = self._layers[layer].view()
        view.setflags(write=False)
        return view

    def pull(self, layer: int, nodes) -> np.ndarray:
        """Copy the given rows, in the given node order."""
        self._check_layer(layer)
        nodes = np.asarray(nodes, dtype=np.int64)
        if nodes.size and (nodes.min() < 0 or nodes.max() >= self.num_nodes):
            raise ValueError(f"node index out of range [0, {self.num_nodes})")
        return self._layers[layer][nodes].copy()

    def push(self, layer: int, nodes, values: np.ndarray) -> None:
        """Overwrite exactly the given rows. Layer 0 holds constants."""
        self._check_layer(layer)
        if layer == 0:
            raise ValueError("layer 0 aliases the input features and cannot be pushed")
        nodes = np.asarray(nodes, dtype=np.int64)
        values = np.asarray(values, dtype=DTYPE)
        if values.shape != (nodes.size, self._layers[layer].shape[1]):
            raise ValueError(
                f"push shape mismatch: got {values.shape}, expected ({nodes.size}, {self._layers[layer].shape[1]})"
            )
        if nodes.size and (nodes.min() < 0 or nodes.max() >= self.num_nodes):
            raise ValueError(f"node index out of range [0, {self.num_nodes})")
        self._layers[layer][nodes] = values

    def dump_layer(self, layer: int, path) -> None:
        """Debug dump of one layer as raw little-endian float32 (features.bin style)."""
        self._check_layer(layer)
        Path(path).write_bytes(np.ascontiguousarray(self._layers[layer], dtype="<f4").tobytes())

    def copy(self) -> "HistoryStore":
        dup = HistoryStore(self._layers[0], [])
        dup._layers.extend(layer.copy() for layer in self._layers[1:])
        return dup

    def _check_layer(self, layer: int) -> None:
        if not (0 <= layer < len(self._layers)):
            raise ValueError(f"layer must be in [0, {len(self._layers)}), got {layer}")


@dataclass
class JacobianCache:
    """Dense per-node jacobians of the first hidden layer w.r.t. its parameters.

    ``jac[v]`` has shape (hidden, num_params) where the parameter axis is the
    flattened first-layer weight matrix (row-major) followed by its bias. The
    cache scales with num_nodes x num_params and is guarded by a budget for
    that reason.
    """

    jac: np.ndarray  # (num_nodes, hidden, num_params) float32
    num_weight_params: int

    @property
    def num_nodes(self) -> int:
        return self.jac.shape[0]

    @property
    def hidden(self) -> int:
        return self.jac.shape[1]

    @property
    def num_params(self) -> int:
        return self.jac.shape[2]

    def nbytes(self) -> int:
        return self.jac.nbytes
