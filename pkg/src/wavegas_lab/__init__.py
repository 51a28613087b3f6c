"""wavegas-lab: a self-contained mini GNN training engine.

Trains a 2-layer GCN four ways — full-batch, against historical embeddings
(gas), with per-epoch waveform-style refresh sweeps (wavegas), and with a
first-layer jacobian cache restoring out-of-batch gradients (gradas) — plus a
benchmark harness for accuracy/timing/staleness/significance analyses.
"""

from .graph import DatasetError, Graph, build_graph, gcn_normalize, load_dataset, save_dataset, synth_sbm
from .history import HistoryStore, JacobianCache
from .linalg import CsrMatrix, matmul, matmul_tn, relu, relu_grad, softmax_rows, spmm, spmm_rows, spmm_t
from .model import (
    AdamState,
    ForwardTape,
    GradBuffer,
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
from .partition import BatchView, PartitionPlan, build_batches, greedy_partition
from .staleness import StalenessReport, measure_staleness, staleness_from_activations
from .stats import WilcoxonResult, wilcoxon_one_sided
from .trainers import (
    RunRecord,
    TrainConfig,
    accuracy,
    run_training,
    train_full,
    train_gas,
    train_gradas,
    train_wavegas,
)

__version__ = "0.1.0"

__all__ = [
    "AdamState", "BatchView", "CsrMatrix", "DatasetError", "ForwardTape", "GradBuffer",
    "Graph", "HistoryStore", "JacobianCache", "ModelParams", "PartitionPlan", "RunRecord",
    "StalenessReport", "TrainConfig", "WilcoxonResult", "accuracy", "adam_step",
    "backward_batch", "build_batches", "build_graph", "build_jacobians", "dropout_mask",
    "forward_batch", "forward_full", "gcn_normalize", "greedy_partition", "init_history",
    "init_params", "load_dataset", "matmul", "matmul_tn", "measure_staleness", "relu",
    "relu_grad", "run_training", "save_dataset", "softmax_rows", "spmm", "spmm_rows",
    "spmm_t", "staleness_from_activations", "synth_sbm", "train_full", "train_gas",
    "train_gradas", "train_wavegas", "wilcoxon_one_sided",
]
