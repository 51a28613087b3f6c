"""Graph partitioning and mini-batch construction.

Partitions are grown by seeded BFS region-growing (deterministic for a fixed
seed) rather than a multilevel partitioner; the achieved edge cut is exposed
so experiments can record the interface size between batches. Partitions are
grouped `batch_parts` at a time into mini-batches, with the grouping shuffled
per epoch.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .graph import Graph
from .linalg import CsrMatrix


@dataclass(frozen=True)
class PartitionPlan:
    """Node-to-partition assignment plus the batch grouping width."""

    num_partitions: int
    assignment: np.ndarray
    batch_parts: int

    def sizes(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=self.num_partitions)

    def cut_edges(self, g: Graph) -> int:
        """Number of undirected edges crossing partition boundaries."""
        rows = np.repeat(np.arange(g.num_nodes), np.diff(g.adjacency.row_ptr))
        cols = g.adjacency.col_idx
        crossing = self.assignment[rows] != self.assignment[cols]
        return int(crossing.sum()) // 2

    def cut_fraction(self, g: Graph) -> float:
        return self.cut_edges(g) / g.num_edges if g.num_edges else 0.0


@dataclass(frozen=True)
class BatchView:
    """One mini-batch: its nodes, their one-hop exterior, and a local
    adjacency slice.

    ``local_adj`` holds the normalized-adjacency rows of ``in_nodes`` with
    columns remapped so that [0, |in|) are in_nodes (in order) and
    [|in|, |in|+|halo|) are halo_nodes (in order).
    """

    batch_id: int
    in_nodes: np.ndarray
    halo_nodes: np.ndarray
    local_adj: CsrMatrix


def greedy_partition(g: Graph, num_partitions: int, seed: int, batch_parts: int = 1) -> PartitionPlan:
    """Grow `num_partitions` regions by BFS from random unassigned seeds.

    Each region grows to ceil(N/P) nodes or until its frontier is exhausted;
    leftover nodes join the smallest adjacent partition (isolated remainders
    join the globally smallest one).
    """
    n = g.num_nodes
    if not (1 <= num_partitions <= n):
        raise ValueError(f"num_partitions must be in [1, {n}], got {num_partitions}")
    if not (1 <= batch_parts <= num_partitions):
        raise ValueError(f"batch_parts must be in [1, {num_partitions}], got {batch_parts}")
    rng = np.random.default_rng(seed)
    assignment = np.full(n, -1, dtype=np.int64)
    target = -(-n // num_partitions)

    for p in range(num_partitions):
        unassigned = np.flatnonzero(assignment < 0)
        if unassigned.size == 0:
            break
        # prefer seeds that can actually grow, so stranded single-node pockets
        # fall to the leftover pass instead of becoming their own partition
        growable = [v for v in unassigned if np.any(assignment[g.neighbors(v)] < 0)]
        start = int(rng.choice(np.asarray(growable if growable else unassigned)))
        assignment[start] = p
        size = 1
        queue = deque([start])
        while queue and size < target:
            v = queue.popleft()
            for w in g.neighbors(v):
                if assignment[w] < 0:
                    assignment[w] = p
                    queue.append(w)
                    size += 1
                    if size >= target:
                        break

    # leftovers: attach to the smallest adjacent partition, iterating so
    # chains of unassigned nodes resolve; strand isolated components onto the
    # globally smallest partition
    while True:
        leftover = np.flatnonzero(assignment < 0)
        if leftover.size == 0:
            break
        sizes = np.bincount(assignment[assignment >= 0], minlength=num_partitions)
        progressed = False
        for v in leftover:
            parts = assignment[g.neighbors(v)]
            parts = parts[parts >= 0]
            if parts.size:
                best = parts[np.argmin(sizes[parts])]
                assignment[v] = best
                sizes[best] += 1
                progressed = True
        if not progressed:
            v = leftover[0]
            best = int(np.argmin(sizes))
            assignment[v] = best

    return PartitionPlan(num_partitions, assignment, batch_parts)


def build_batches(g: Graph, norm: CsrMatrix, plan: PartitionPlan, epoch_seed: int) -> list[BatchView]:
    """Shuffle partitions by `epoch_seed` and group them into batch views."""
    rng = np.random.default_rng(epoch_seed)
    order = rng.permutation(plan.num_partitions)
    part_nodes = [np.flatnonzero(plan.assignment == p) for p in range(plan.num_partitions)]

    views = []
    for batch_id, start in enumerate(range(0, plan.num_partitions, plan.batch_parts)):
        group = order[start:start + plan.batch_parts]
        in_nodes = np.sort(np.concatenate([part_nodes[p] for p in group]))
        if in_nodes.size == 0:
            continue
        row_slices = [norm.col_idx[norm.row_ptr[v]:norm.row_ptr[v + 1]] for v in in_nodes]
        touched = np.unique(np.concatenate(row_slices)) if row_slices else np.zeros(0, dtype=np.int64)
        halo_nodes = np.setdiff1d(touched, in_nodes, assume_unique=True)

        col_map = np.full(g.num_nodes, -1, dtype=np.int64)
        col_map[in_nodes] = np.arange(in_nodes.size)
        col_map[halo_nodes] = in_nodes.size + np.arange(halo_nodes.size)

        counts = np.array([len(s) for s in row_slices], dtype=np.int64)
        row_ids = np.repeat(np.arange(in_nodes.size), counts)
        old_cols = np.concatenate(row_slices) if row_slices else np.zeros(0, dtype=np.int64)
        new_cols = col_map[old_cols]
        vals = np.concatenate(
            [norm.values[norm.row_ptr[v]:norm.row_ptr[v + 1]] for v in in_nodes]
        ) if row_slices else np.zeros(0, dtype=np.float32)
        # re-sort within rows after the column remap
        perm = np.lexsort((new_cols, row_ids))
        row_ptr = np.concatenate([[0], np.cumsum(counts)])
        local = CsrMatrix(
            in_nodes.size, in_nodes.size + halo_nodes.size, row_ptr, new_cols[perm], vals[perm]
        )
        views.append(BatchView(batch_id, in_nodes, halo_nodes, local))
    return views
