import numpy as np

from wavegas_lab.graph import gcn_normalize, synth_sbm
from wavegas_lab.model import forward_batch, forward_full, init_history, init_params
from wavegas_lab.partition import build_batches, greedy_partition
from wavegas_lab.staleness import measure_staleness


def setup(seed=0):
    g = synth_sbm(3, 8, 0.5, 0.1, 4, 3, seed=seed)
    norm = gcn_normalize(g)
    params = init_params(4, 5, 3, seed=seed + 1)
    store = init_history(params, g)
    return g, norm, params, store


def test_layer0_staleness_is_exactly_zero():
    g, norm, params, store = setup()
    report = measure_staleness(params, g, norm, store)
    assert report.max_per_layer[0] == 0.0
    assert report.mean_per_layer[0] == 0.0


def test_zero_history_staleness_equals_activation_norms():
    g, norm, params, store = setup()
    _, tape = forward_full(params, norm, g.features, track=True)
    norms = np.linalg.norm(tape.h1.astype(np.float64), axis=1)
    report = measure_staleness(params, g, norm, store)
    assert report.max_per_layer[1] == np.float64(norms.max())
    assert report.mean_per_layer[1] == np.float64(norms.mean())


def test_staleness_zero_after_refresh_sweeps():
    g, norm, params, store = setup(seed=2)
    plan = greedy_partition(g, 4, seed=0)
    views = build_batches(g, norm, plan, epoch_seed=0)
    for _ in range(2):  # one sweep per layer suffices for a 2-layer net
        for bv in views:
            forward_batch(params, bv, store)
    report = measure_staleness(params, g, norm, store)
    assert max(report.max_per_layer) <= 1e-5


def test_staleness_nonincreasing_across_sweeps():
    g, norm, params, store = setup(seed=5)
    plan = greedy_partition(g, 4, seed=1)
    views = build_batches(g, norm, plan, epoch_seed=3)
    prev = measure_staleness(params, g, norm, store).max_per_layer
    for _ in range(4):
        for bv in views:
            forward_batch(params, bv, store)
        cur = measure_staleness(params, g, norm, store).max_per_layer
        for layer in range(len(cur)):
            assert cur[layer] <= prev[layer] + 1e-7
        prev = cur
