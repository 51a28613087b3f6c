#!/usr/bin/env python3
"""Partition a synthetic graph and inspect the mini-batch views.

The partitioner grows regions by seeded BFS; every mini-batch knows which of
its neighbors live outside the batch (the halo), which is exactly what gets
served from history during training.
"""

import numpy as np

from wavegas_lab import build_batches, gcn_normalize, greedy_partition, synth_sbm

g = synth_sbm(blocks=4, nodes_per_block=25, p_in=0.4, p_out=0.04,
              num_features=8, num_classes=4, seed=0)
print(f"graph: {g.num_nodes} nodes, {g.num_edges} undirected edges, "
      f"{g.num_features} features, {g.num_classes} classes")

norm = gcn_normalize(g)
plan = greedy_partition(g, num_partitions=8, seed=0, batch_parts=2)
print(f"partition sizes: {plan.sizes().tolist()}")
print(f"edge cut: {plan.cut_edges(g)} of {g.num_edges} edges "
      f"({100 * plan.cut_fraction(g):.1f}% interface)")

views = build_batches(g, norm, plan, epoch_seed=0)
print(f"\n{len(views)} mini-batches of {plan.batch_parts} partitions each:")
for bv in views:
    frac = bv.halo_nodes.size / bv.in_nodes.size
    print(f"  batch {bv.batch_id}: {bv.in_nodes.size:3d} in-nodes, "
          f"{bv.halo_nodes.size:3d} halo nodes ({100 * frac:.0f}% of batch size)")

bv = views[0]
covered = np.sort(np.concatenate([v.in_nodes for v in views]))
print("\nevery node appears in exactly one batch:",
      bool(np.array_equal(covered, np.arange(g.num_nodes))))
print(f"batch 0 local slice: {bv.local_adj.rows}x{bv.local_adj.cols} "
      f"with {bv.local_adj.nnz} entries "
      f"(columns 0..{bv.in_nodes.size - 1} are in-batch, the rest halo)")
