"""Two-layer GCN with explicit forward passes and a hand-derived backward.

Three aggregation contexts share the same layer arithmetic: the full graph,
a mini-batch reading out-of-batch neighbors from a history store (pulled rows
are constants to the backward pass), and a mini-batch whose backward restores
the out-of-batch gradient contribution from cached first-layer jacobians.

Layer arithmetic, with ``adj`` either the full normalized adjacency or a
batch's local slice:

    z1 = adj @ u0 @ w1 + b1        u0 = [in-batch features | pulled features]
    h1 = relu(z1)                  (pushed to history, then dropout in-batch)
    z2 = adj @ u1 @ w2 + b2        u1 = [dropped h1        | pulled history ]

With ``residual_mode`` the second layer adds its own input back onto the
output (requires hidden width == number of classes).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph
from .history import HistoryStore, JacobianCache
from .linalg import DTYPE, CsrMatrix, add_rows, matmul, matmul_tn, relu, relu_grad, softmax_rows, spmm, spmm_t
from .partition import BatchView

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass
class ModelParams:
    w1: np.ndarray  # (F, H)
    b1: np.ndarray  # (H,)
    w2: np.ndarray  # (H, C)
    b2: np.ndarray  # (C,)
    residual_mode: bool = False

    def __post_init__(self):
        if self.residual_mode and self.w2.shape[0] != self.w2.shape[1]:
            raise ValueError(
                f"residual_mode needs hidden width == classes, got {self.w2.shape[0]} vs {self.w2.shape[1]}"
            )

    @property
    def num_features(self) -> int:
        return self.w1.shape[0]

    @property
    def hidden(self) -> int:
        return self.w1.shape[1]

    @property
    def num_classes(self) -> int:
        return self.w2.shape[1]

    def tensors(self) -> list[np.ndarray]:
        return [self.w1, self.b1, self.w2, self.b2]

    def copy(self) -> "ModelParams":
        return ModelParams(self.w1.copy(), self.b1.copy(), self.w2.copy(), self.b2.copy(), self.residual_mode)


@dataclass
class GradBuffer:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray

    def tensors(self) -> list[np.ndarray]:
        return [self.w1, self.b1, self.w2, self.b2]

    @classmethod
    def zeros_like(cls, params: ModelParams) -> "GradBuffer":
        return cls(*[np.zeros_like(t) for t in params.tensors()])


@dataclass
class ForwardTape:
    """Intermediate results of a tracked forward pass.

    Consume the tape (run backward) before the next optimizer step: it holds
    references to the parameters used in the forward.
    """

    params: ModelParams
    adj: CsrMatrix
    in_nodes: np.ndarray | None  # None means the full graph
    halo_nodes: np.ndarray
    u0: np.ndarray
    a0: np.ndarray
    z1: np.ndarray
    h1: np.ndarray
    mask_rows: np.ndarray | None
    u1: np.ndarray
    a1: np.ndarray
    z2: np.ndarray

    @property
    def n_in(self) -> int:
        return self.z2.shape[0]


def init_params(num_features: int, hidden: int, num_classes: int, seed: int,
                residual_mode: bool = False) -> ModelParams:
    """Glorot-uniform weights, zero biases, seeded."""
    rng = np.random.default_rng(seed)

    def glorot(fan_in, fan_out):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-limit, limit, size=(fan_in, fan_out)).astype(DTYPE)

    return ModelParams(
        glorot(num_features, hidden),
        np.zeros(hidden, dtype=DTYPE),
        glorot(hidden, num_classes),
        np.zeros(num_classes, dtype=DTYPE),
        residual_mode,
    )


def init_history(params: ModelParams, g: Graph) -> HistoryStore:
    """Layer 0 = features; hidden-layer history starts at zero."""
    return HistoryStore(g.features, [params.hidden])


def dropout_mask(seed: int, epoch: int, num_nodes: int, width: int, rate: float) -> np.ndarray | None:
    """Counter-based per-epoch dropout mask, indexed by global node id.

    Full-batch and batched runs draw identical per-node masks because the
    stream is keyed by (seed, epoch) and rows are addressed by node id.
    """
    if rate <= 0.0:
        return None
    if not rate < 1.0:
        raise ValueError(f"dropout rate must be < 1, got {rate}")
    rng = np.random.Generator(np.random.Philox(key=[int(seed), int(epoch)]))
    keep = rng.random((num_nodes, width)) >= rate
    return keep.astype(DTYPE) * DTYPE(1.0 / (1.0 - rate))


def _layer(adj: CsrMatrix, inputs: np.ndarray, w: np.ndarray, b: np.ndarray):
    a = spmm(adj, inputs)
    return a, add_rows(matmul(a, w), b)


def forward_full(params: ModelParams, norm: CsrMatrix, x: np.ndarray,
                 track: bool = False, mask: np.ndarray | None = None):
    """Whole-graph forward; returns (logits, tape-or-None)."""
    x = np.ascontiguousarray(x, dtype=DTYPE)
    a0, z1 = _layer(norm, x, params.w1, params.b1)
    h1 = relu(z1)
    h1d = h1 * mask if mask is not None else h1
    a1, z2 = _layer(norm, h1d, params.w2, params.b2)
    if params.residual_mode:
        z2 = z2 + h1d
    if not track:
        return z2, None
    tape = ForwardTape(params, norm, None, np.zeros(0, dtype=np.int64),
                       x, a0, z1, h1, mask, h1d, a1, z2)
    return z2, tape


def forward_batch(params: ModelParams, bv: BatchView, store: HistoryStore,
                  track: bool = False, mask: np.ndarray | None = None):
    """Mini-batch forward against the history store; returns (logits, tape-or-None).

    Out-of-batch neighbor rows come from the store; freshly computed in-batch
    activations are pushed back so later batches (and sweeps) read them.
    """
    if mask is not None and store.num_nodes != mask.shape[0]:
        raise ValueError("dropout mask rows must match the number of graph nodes")
    if bv.local_adj.cols != bv.in_nodes.size + bv.halo_nodes.size:
        raise ValueError("batch view columns do not match in+halo node counts")
    if store.dims()[1] != params.hidden:
        raise ValueError(
            f"history hidden width {store.dims()[1]} does not match model width {params.hidden}"
        )
    u0 = np.concatenate([store.pull(0, bv.in_nodes), store.pull(0, bv.halo_nodes)], axis=0)
    a0, z1 = _layer(bv.local_adj, u0, params.w1, params.b1)
    h1 = relu(z1)
    store.push(1, bv.in_nodes, h1)
    h1d = h1 * mask[bv.in_nodes] if mask is not None else h1
    u1 = np.concatenate([h1d, store.pull(1, bv.halo_nodes)], axis=0)
    a1, z2 = _layer(bv.local_adj, u1, params.w2, params.b2)
    if params.residual_mode:
        z2 = z2 + h1d
    if not track:
        return z2, None
    mask_rows = mask[bv.in_nodes] if mask is not None else None
    tape = ForwardTape(params, bv.local_adj, bv.in_nodes, bv.halo_nodes,
                       u0, a0, z1, h1, mask_rows, u1, a1, z2)
    return z2, tape


def _cross_entropy(z2: np.ndarray, label_rows: np.ndarray, train_rows: np.ndarray):
    """Mean softmax cross-entropy over `train_rows` plus d(loss)/d(logits)."""
    n_train = train_rows.size
    z = z2[train_rows].astype(np.float64)
    m = z.max(axis=1, keepdims=True)
    lse = np.log(np.exp(z - m).sum(axis=1)) + m[:, 0]
    y = label_rows[train_rows]
    loss = float(np.mean(lse - z[np.arange(n_train), y]))
    probs = softmax_rows(z2)
    dz2 = np.zeros_like(z2)
    dz2[train_rows] = probs[train_rows]
    dz2[train_rows, y] -= DTYPE(1)
    dz2[train_rows] /= DTYPE(n_train)
    return loss, dz2


def backward_batch(tape: ForwardTape, labels: np.ndarray, train_mask: np.ndarray,
                   mode: str = "truncated", jac: JacobianCache | None = None):
    """Gradients of the mean training cross-entropy in this view.

    ``truncated`` treats pulled history rows as constants, so no gradient
    flows to parameters through out-of-batch neighbors. ``gradas`` adds, for
    every halo node, the product of the loss gradient at its pulled hidden row
    with that node's cached jacobian, restoring the missing contribution.
    Returns (GradBuffer, loss).
    """
    if mode not in ("truncated", "gradas"):
        raise ValueError(f"unknown backward mode {mode!r}")
    if mode == "gradas" and jac is None:
        raise ValueError("gradas backward requires a jacobian cache")
    params = tape.params
    if tape.in_nodes is None:
        label_rows = np.asarray(labels, dtype=np.int64)
        train_rows = np.flatnonzero(train_mask)
    else:
        label_rows = np.asarray(labels, dtype=np.int64)[tape.in_nodes]
        train_rows = np.flatnonzero(np.asarray(train_mask, dtype=bool)[tape.in_nodes])
    if train_rows.size == 0:
        raise ValueError("no training nodes in this view")

    loss, dz2 = _cross_entropy(tape.z2, label_rows, train_rows)
    db2 = dz2.sum(axis=0, dtype=np.float64).astype(DTYPE)
    dw2 = matmul_tn(tape.a1, dz2)
    dm = matmul(dz2, params.w2.T)
    du1 = spmm_t(tape.adj, dm)

    n_in = tape.n_in
    dh1d = du1[:n_in].copy()
    if params.residual_mode:
        dh1d += dz2
    dh1 = dh1d * tape.mask_rows if tape.mask_rows is not None else dh1d
    dz1 = relu_grad(dh1, tape.z1)
    db1 = dz1.sum(axis=0, dtype=np.float64).astype(DTYPE)
    dw1 = matmul_tn(tape.a0, dz1)

    if mode == "gradas" and tape.halo_nodes.size:
        g_halo = du1[n_in:].astype(np.float64)
        halo_jac = jac.jac[tape.halo_nodes].astype(np.float64)
        delta = np.einsum("nhp,nh->p", halo_jac, g_halo)
        dw1 = dw1 + delta[:jac.num_weight_params].reshape(params.w1.shape).astype(DTYPE)
        db1 = db1 + delta[jac.num_weight_params:].astype(DTYPE)

    return GradBuffer(dw1, db1, dw2, db2), loss


def build_jacobians(params: ModelParams, norm: CsrMatrix, x: np.ndarray,
                    budget: int = 10_000_000) -> JacobianCache:
    """Materialize d(hidden)/d(first-layer params) for every node.

    The cache holds num_nodes x hidden x num_params float32 entries and is
    refused outright when num_nodes * num_params exceeds `budget`.
    """
    n = x.shape[0]
    f, h = params.w1.shape
    num_params = f * h + h
    if n * num_params > budget:
        raise ValueError(
            f"jacobian cache of num_nodes*num_params = {n * num_params} entries "
            f"exceeds the configured budget of {budget}"
        )
    ax = spmm(norm, np.ascontiguousarray(x, dtype=DTYPE))
    z1 = add_rows(matmul(ax, params.w1), params.b1)
    active = (z1 > 0).astype(DTYPE)
    jac = np.zeros((n, h, num_params), dtype=DTYPE)
    for k in range(h):
        jac[:, k, k:f * h:h] = ax * active[:, k:k + 1]
        jac[:, k, f * h + k] = active[:, k]
    return JacobianCache(jac, f * h)


@dataclass
class AdamState:
    m: list[np.ndarray]
    v: list[np.ndarray]
    t: int = 0

    @classmethod
    def zeros_like(cls, params: ModelParams) -> "AdamState":
        return cls(
            [np.zeros(p.shape, dtype=np.float64) for p in params.tensors()],
            [np.zeros(p.shape, dtype=np.float64) for p in params.tensors()],
        )


def adam_step(params: ModelParams, grads: GradBuffer, state: AdamState,
              lr: float, weight_decay: float = 0.0) -> None:
    """One Adam step, in place. Decoupled weight decay shrinks w1 only."""
    state.t += 1
    t = state.t
    for i, (p, g) in enumerate(zip(params.tensors(), grads.tensors())):
        if p.shape != g.shape:
            raise ValueError(f"gradient shape {g.shape} does not match parameter shape {p.shape}")
        g64 = g.astype(np.float64)
        state.m[i] = ADAM_BETA1 * state.m[i] + (1.0 - ADAM_BETA1) * g64
        state.v[i] = ADAM_BETA2 * state.v[i] + (1.0 - ADAM_BETA2) * g64 * g64
        m_hat = state.m[i] / (1.0 - ADAM_BETA1 ** t)
        v_hat = state.v[i] / (1.0 - ADAM_BETA2 ** t)
        new = p.astype(np.float64)
        if i == 0 and weight_decay:
            new = new * (1.0 - lr * weight_decay)
        new -= lr * m_hat / (np.sqrt(v_hat) + ADAM_EPS)
        p[...] = new.astype(DTYPE)
