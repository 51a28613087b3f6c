"""Training procedures sharing the model, partitioner and history modules.

Four methods are provided:

* ``full``    — whole-graph forward/backward, one optimizer step per epoch.
* ``gas``     — per-batch training against stored histories; pulled
                out-of-batch rows are constants to the backward pass, and the
                optimizer steps after every batch.
* ``wavegas`` — like ``gas``, but each epoch first runs (I-1) gradient-free
                refresh sweeps over all batches, re-pushing histories so the
                tracked pass reads fresher out-of-batch rows. I=1 is exactly
                ``gas``.
* ``gradas``  — like ``gas``, plus a per-epoch rebuild of the first-layer
                jacobian cache; the backward adds the cached contribution of
                every halo node.

Validation/test accuracy and the per-epoch staleness report come from one
shared full-graph inference pass per epoch, computed outside the timed
training region. Wall time covers the training loop only.

Run metadata worth knowing: hidden-layer history starts at zero and is reset
for every run; refresh sweeps run without dropout and iterate batches in the
same shuffled order as that epoch's main loop; test accuracy is reported at
the epoch with the best validation accuracy (first epoch on ties).
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .graph import Graph, gcn_normalize
from .history import HistoryStore
from .linalg import CsrMatrix
from .model import (
    AdamState,
    ModelParams,
    adam_step,
    backward_batch,
    build_jacobians,
    dropout_mask,
    forward_batch,
    forward_full,
    init_history,
    init_params,
)
from .partition import BatchView, build_batches, greedy_partition
from .staleness import StalenessReport, measure_staleness, staleness_from_activations

METHODS = ("full", "gas", "wavegas", "gradas")


@dataclass
class TrainConfig:
    method: str = "full"
    epochs: int = 200
    wave_iters: int = 1
    partitions: int = 1
    batch_parts: int = 1
    lr: float = 0.01
    seed: int = 0
    hidden: int = 16
    dropout: float = 0.5
    weight_decay: float = 5e-4
    dataset: str = ""
    residual_mode: bool = False
    jac_budget: int = 10_000_000
    batched_eval: bool = False
    staleness_csv: str | None = None

    def validate(self) -> None:
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.wave_iters < 1:
            raise ValueError(f"wave_iters must be >= 1, got {self.wave_iters}")
        if not (self.partitions >= self.batch_parts >= 1):
            raise ValueError(
                f"need partitions >= batch_parts >= 1, got {self.partitions} and {self.batch_parts}"
            )
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")


CSV_COLUMNS = (
    "method", "dataset", "seed", "I", "P", "batch_parts",
    "best_val_acc", "test_acc", "wall_time_s", "final_staleness_per_layer",
)


@dataclass
class RunRecord:
    """Result of one training run; one CSV row plus full per-epoch traces."""

    method: str
    dataset: str
    seed: int
    wave_iters: int
    partitions: int
    batch_parts: int
    best_val_acc: float
    test_acc: float
    wall_time_s: float
    final_staleness: tuple[float, ...]
    epoch_losses: list[float] = field(default_factory=list)
    batch_losses: list[list[float]] = field(default_factory=list)
    val_accs: list[float] = field(default_factory=list)
    test_accs: list[float] = field(default_factory=list)
    staleness_trace: list[tuple[float, ...]] = field(default_factory=list)
    cut_fraction: float | None = None
    history_nbytes: int | None = None

    @staticmethod
    def csv_header() -> str:
        return ",".join(CSV_COLUMNS)

    def to_csv_fields(self) -> list[str]:
        staleness = ";".join(f"{x:.8g}" for x in self.final_staleness)
        return [
            self.method,
            self.dataset,
            str(self.seed),
            str(self.wave_iters),
            str(self.partitions),
            str(self.batch_parts),
            f"{self.best_val_acc:.6f}",
            f"{self.test_acc:.6f}",
            f"{self.wall_time_s:.3f}",
            staleness,
        ]

    def to_csv_row(self) -> str:
        buf = io.StringIO()
        csv.writer(buf, lineterminator="").writerow(self.to_csv_fields())
        return buf.getvalue()

    def payload(self) -> dict:
        """Everything deterministic: excludes wall time and the method label."""
        return {
            "dataset": self.dataset,
            "seed": self.seed,
            "wave_iters": self.wave_iters,
            "partitions": self.partitions,
            "batch_parts": self.batch_parts,
            "best_val_acc": self.best_val_acc,
            "test_acc": self.test_acc,
            "final_staleness": self.final_staleness,
            "epoch_losses": tuple(self.epoch_losses),
            "batch_losses": tuple(tuple(b) for b in self.batch_losses),
            "val_accs": tuple(self.val_accs),
            "test_accs": tuple(self.test_accs),
        }


def accuracy(logits: np.ndarray, labels: np.ndarray, idx: np.ndarray) -> float:
    if len(idx) == 0:
        return 0.0
    pred = np.argmax(logits[idx], axis=1)
    return float(np.mean(pred == labels[idx]))


def _inference(params: ModelParams, norm: CsrMatrix, g: Graph):
    """Dropout-free full-graph forward; returns (hidden activations, logits)."""
    logits, tape = forward_full(params, norm, g.features, track=True)
    return tape.h1, logits


def _inference_batched(params: ModelParams, views: list[BatchView], store: HistoryStore,
                       num_nodes: int, sweeps: int) -> np.ndarray:
    """Batched inference: refresh sweeps on a private store copy, then collect logits."""
    scratch = store.copy()
    for _ in range(max(0, sweeps - 1)):
        for bv in views:
            forward_batch(params, bv, scratch)
    logits = np.zeros((num_nodes, params.num_classes), dtype=np.float32)
    for bv in views:
        out, _ = forward_batch(params, bv, scratch)
        logits[bv.in_nodes] = out
    return logits


class _BestTracker:
    """Track test accuracy at the epoch with the best validation accuracy."""

    def __init__(self):
        self.best_val = -1.0
        self.test_at_best = 0.0

    def update(self, val_acc: float, test_acc: float) -> None:
        if val_acc > self.best_val:
            self.best_val = val_acc
            self.test_at_best = test_acc


def run_training(cfg: TrainConfig, g: Graph) -> RunRecord:
    cfg.validate()
    if cfg.method == "full":
        return train_full(cfg, g)
    if cfg.method == "gas":
        return train_gas(cfg, g)
    if cfg.method == "wavegas":
        return train_wavegas(cfg, g)
    return train_gradas(cfg, g)


def train_full(cfg: TrainConfig, g: Graph) -> RunRecord:
    """Whole-graph training baseline."""
    cfg.validate()
    norm = gcn_normalize(g)
    params = init_params(g.num_features, cfg.hidden, g.num_classes, cfg.seed, cfg.residual_mode)
    state = AdamState.zeros_like(params)
    train_mask = np.zeros(g.num_nodes, dtype=bool)
    train_mask[g.train_idx] = True

    record = RunRecord(cfg.method, cfg.dataset, cfg.seed, cfg.wave_iters,
                       cfg.partitions, cfg.batch_parts, 0.0, 0.0, 0.0, ())
    best = _BestTracker()
    total_time = 0.0
    for epoch in range(cfg.epochs):
        mask = dropout_mask(cfg.seed, epoch, g.num_nodes, cfg.hidden, cfg.dropout)
        t0 = time.perf_counter()
        _, tape = forward_full(params, norm, g.features, track=True, mask=mask)
        grads, loss = backward_batch(tape, g.labels, train_mask)
        adam_step(params, grads, state, cfg.lr, cfg.weight_decay)
        total_time += time.perf_counter() - t0

        _, logits = _inference(params, norm, g)
        val_acc = accuracy(logits, g.labels, g.val_idx)
        test_acc = accuracy(logits, g.labels, g.test_idx)
        best.update(val_acc, test_acc)
        record.epoch_losses.append(loss)
        record.batch_losses.append([loss])
        record.val_accs.append(val_acc)
        record.test_accs.append(test_acc)

    record.best_val_acc = best.best_val
    record.test_acc = best.test_at_best
    record.wall_time_s = total_time
    return record


def train_gas(cfg: TrainConfig, g: Graph) -> RunRecord:
    return _train_batched(cfg, g, refresh_sweeps=0, use_jacobians=False)


def train_wavegas(cfg: TrainConfig, g: Graph) -> RunRecord:
    """(I-1) gradient-free refresh sweeps per epoch, then the gas main loop."""
    return _train_batched(cfg, g, refresh_sweeps=cfg.wave_iters - 1, use_jacobians=False)


def train_gradas(cfg: TrainConfig, g: Graph) -> RunRecord:
    """gas with a per-epoch jacobian-cache rebuild and corrected backward."""
    return _train_batched(cfg, g, refresh_sweeps=0, use_jacobians=True)


def _train_batched(cfg: TrainConfig, g: Graph, refresh_sweeps: int, use_jacobians: bool) -> RunRecord:
    cfg.validate()
    norm = gcn_normalize(g)
    plan = greedy_partition(g, cfg.partitions, cfg.seed, cfg.batch_parts)
    params = init_params(g.num_features, cfg.hidden, g.num_classes, cfg.seed, cfg.residual_mode)
    state = AdamState.zeros_like(params)
    store = init_history(params, g)
    train_mask = np.zeros(g.num_nodes, dtype=bool)
    train_mask[g.train_idx] = True
    total_train = int(train_mask.sum())
    mode = "gradas" if use_jacobians else "truncated"

    record = RunRecord(cfg.method, cfg.dataset, cfg.seed, cfg.wave_iters,
                       cfg.partitions, cfg.batch_parts, 0.0, 0.0, 0.0, (),
                       cut_fraction=plan.cut_fraction(g))
    best = _BestTracker()
    staleness_rows: list[str] = []
    total_time = 0.0

    for epoch in range(cfg.epochs):
        mask = dropout_mask(cfg.seed, epoch, g.num_nodes, cfg.hidden, cfg.dropout)
        t0 = time.perf_counter()
        views = build_batches(g, norm, plan, epoch_seed=cfg.seed + epoch)

        # gradient-free refresh sweeps (dropout off): re-push histories only
        for sweep in range(refresh_sweeps):
            for bv in views:
                forward_batch(params, bv, store)
            if cfg.staleness_csv is not None:
                total_time += time.perf_counter() - t0
                _log_staleness(staleness_rows, epoch, sweep, params, g, norm, store)
                t0 = time.perf_counter()

        jac = None
        if use_jacobians:
            jac = build_jacobians(params, norm, g.features, cfg.jac_budget)

        batch_losses: list[float] = []
        weighted_loss = 0.0
        for bv in views:
            _, tape = forward_batch(params, bv, store, track=True, mask=mask)
            n_train_b = int(train_mask[bv.in_nodes].sum())
            if n_train_b == 0:
                continue  # no loss term in this batch; skip the step
            grads, loss = backward_batch(tape, g.labels, train_mask, mode=mode, jac=jac)
            adam_step(params, grads, state, cfg.lr, cfg.weight_decay)
            batch_losses.append(loss)
            weighted_loss += loss * (n_train_b / total_train)
        total_time += time.perf_counter() - t0

        h1, logits = _inference(params, norm, g)
        if cfg.batched_eval:
            logits = _inference_batched(params, views, store, g.num_nodes, cfg.wave_iters)
        staleness = staleness_from_activations(store, [g.features, h1])
        if cfg.staleness_csv is not None:
            _append_staleness(staleness_rows, epoch, refresh_sweeps, staleness)
        val_acc = accuracy(logits, g.labels, g.val_idx)
        test_acc = accuracy(logits, g.labels, g.test_idx)
        best.update(val_acc, test_acc)
        record.epoch_losses.append(weighted_loss)
        record.batch_losses.append(batch_losses)
        record.val_accs.append(val_acc)
        record.test_accs.append(test_acc)
        record.staleness_trace.append(staleness.max_per_layer)

    record.best_val_acc = best.best_val
    record.test_acc = best.test_at_best
    record.wall_time_s = total_time
    record.history_nbytes = store.nbytes()
    record.final_staleness = record.staleness_trace[-1] if record.staleness_trace else ()
    if cfg.staleness_csv is not None:
        path = Path(cfg.staleness_csv)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("epoch,sweep,layer,max,mean\n" + "".join(staleness_rows))
    return record


def _log_staleness(rows, epoch, sweep, params, g, norm, store):
    _append_staleness(rows, epoch, sweep, measure_staleness(params, g, norm, store))


def _append_staleness(rows: list[str], epoch: int, sweep: int, report: StalenessReport) -> None:
    for layer, (mx, mn) in enumerate(zip(report.max_per_layer, report.mean_per_layer)):
        rows.append(f"{epoch},{sweep},{layer},{mx:.8g},{mn:.8g}\n")
