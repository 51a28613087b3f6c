"""Benchmark harness: run experiments, sweep refresh iterations, aggregate tables.

Subcommands::

    wavegas-lab train  --data DIR|--synth SPEC --method M [flags] --out results.csv
    wavegas-lab sweep  --data DIR|--synth SPEC --iters 1:6 --runs N --out results.csv
    wavegas-lab report --csv results.csv [more.csv ...]
    wavegas-lab stats  wilcoxon --a results_A.csv --b results_B.csv

Synthetic graphs are described as ``sbm:BLOCKSxNODES`` with optional
``key=value`` settings, e.g. ``sbm:4x25:p_in=0.4,p_out=0.05,f=16,c=4,seed=0``.
``--data NAME`` resolves bare names against $WAVEGAS_DATA_DIR. Exit codes:
0 success, 1 data/runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import multiprocessing
import os
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .graph import DatasetError, Graph, load_dataset, synth_sbm
from .stats import wilcoxon_one_sided
from .trainers import CSV_COLUMNS, RunRecord, TrainConfig, run_training


@dataclass
class ExperimentSpec:
    """One harness invocation: dataset, methods, iteration range, run count."""

    dataset: str
    methods: list[str]
    iters: list[int]
    runs: int
    out: Path
    base_config: TrainConfig
    jobs: int = 1

    def validate(self) -> None:
        if self.runs < 1:
            raise ValueError(f"runs must be >= 1, got {self.runs}")
        if any(i < 1 for i in self.iters):
            raise ValueError(f"iteration counts must be >= 1, got {self.iters}")


def parse_synth_spec(spec: str, default_seed: int = 0) -> Graph:
    parts = spec.split(":")
    if len(parts) < 2 or parts[0] != "sbm" or "x" not in parts[1]:
        raise DatasetError(f"unrecognized synth spec {spec!r}; expected sbm:BLOCKSxNODES[:k=v,...]")
    blocks_s, nodes_s = parts[1].split("x", 1)
    opts = {"p_in": 0.4, "p_out": 0.05, "f": 16.0, "c": float(blocks_s), "seed": float(default_seed)}
    if len(parts) > 2:
        for kv in parts[2].split(","):
            k, _, v = kv.partition("=")
            if k not in opts:
                raise DatasetError(f"unknown synth option {k!r} in {spec!r}")
            opts[k] = float(v)
    return synth_sbm(int(blocks_s), int(nodes_s), opts["p_in"], opts["p_out"],
                     int(opts["f"]), int(opts["c"]), int(opts["seed"]))


def resolve_dataset(args) -> tuple[Graph, str]:
    """Load --data or synthesize --synth; returns (graph, dataset label)."""
    if getattr(args, "synth", None):
        return parse_synth_spec(args.synth), args.synth
    raw = args.data
    path = Path(raw)
    if not path.is_dir():
        root = os.environ.get("WAVEGAS_DATA_DIR")
        if root and (Path(root) / raw).is_dir():
            path = Path(root) / raw
        else:
            raise DatasetError(f"dataset directory {raw!r} not found (WAVEGAS_DATA_DIR={root!r})")
    return load_dataset(path), path.name


def _train_one(task: tuple[TrainConfig, Graph]) -> RunRecord:
    cfg, g = task
    return run_training(cfg, g)


def run_experiments(spec: ExperimentSpec, g: Graph) -> list[RunRecord]:
    """Run every (method, I, run) combination; seeds are base_seed + run index."""
    spec.validate()
    tasks = []
    for method in spec.methods:
        # only wavegas consumes the iteration count; other methods log I=1
        for iters in (spec.iters if method == "wavegas" else [1]):
            for run in range(spec.runs):
                cfg = replace(
                    spec.base_config,
                    method=method,
                    wave_iters=iters,
                    seed=spec.base_config.seed + run,
                    dataset=spec.dataset,
                )
                tasks.append((cfg, g))
    if spec.jobs > 1:
        with multiprocessing.Pool(spec.jobs) as pool:
            records = pool.map(_train_one, tasks)
    else:
        records = [_train_one(t) for t in tasks]
    return records


def append_records(out: Path, records: list[RunRecord]) -> None:
    out.parent.mkdir(parents=True, exist_ok=True)
    fresh = not out.exists()
    with out.open("a", newline="") as fh:
        writer = csv.writer(fh)
        if fresh:
            writer.writerow(CSV_COLUMNS)
        for rec in records:
            writer.writerow(rec.to_csv_fields())


# ---------------------------------------------------------------------------
# CSV aggregation


@dataclass
class ResultRow:
    method: str
    dataset: str
    seed: int
    iters: int
    partitions: int
    batch_parts: int
    best_val_acc: float
    test_acc: float
    wall_time_s: float


def read_results(path: Path) -> list[ResultRow]:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError(f"{path} is empty") from None
        if header != list(CSV_COLUMNS):
            raise DatasetError(f"{path} is not a results CSV (unexpected header)")
        rows = []
        for f in reader:
            if not f:
                continue
            rows.append(ResultRow(f[0], f[1], int(f[2]), int(f[3]), int(f[4]), int(f[5]),
                                  float(f[6]), float(f[7]), float(f[8])))
    return rows


@dataclass
class Aggregate:
    mean_val: float
    mean_test: float
    std_test: float | None
    mean_time: float
    n: int


def aggregate(rows: list[ResultRow]) -> dict[tuple[str, str, int], Aggregate]:
    """Group rows by (dataset, method, iters) and average over runs."""
    groups: dict[tuple[str, str, int], list[ResultRow]] = {}
    for r in rows:
        groups.setdefault((r.dataset, r.method, r.iters), []).append(r)
    out = {}
    for key, rs in groups.items():
        test = np.array([r.test_acc for r in rs])
        val = np.array([r.best_val_acc for r in rs])
        t = np.array([r.wall_time_s for r in rs])
        std = float(test.std(ddof=1)) if len(rs) >= 2 else None
        out[key] = Aggregate(float(val.mean()), float(test.mean()), std, float(t.mean()), len(rs))
    return out


def _column_label(method: str, iters: int, wavegas_multi: bool) -> str:
    if method == "wavegas" and wavegas_multi:
        return f"wavegas(I={iters})"
    return method


def format_report(rows: list[ResultRow]) -> str:
    """Accuracy table with a delta-vs-gas row, timing table, Wilcoxon per I."""
    agg = aggregate(rows)
    datasets = sorted({d for d, _, _ in agg})
    wavegas_iters = sorted({i for _, m, i in agg if m == "wavegas"})
    wavegas_multi = len(wavegas_iters) > 1
    columns = []
    for method in ("gas", "wavegas", "gradas", "full"):
        for iters in (wavegas_iters if method == "wavegas" else [None]):
            keys = {(d, m, i) for d, m, i in agg if m == method and (iters is None or i == iters)}
            if keys:
                any_i = iters if iters is not None else min(k[2] for k in keys)
                columns.append((method, any_i, _column_label(method, any_i, wavegas_multi)))

    def cell(d, method, iters):
        a = agg.get((d, method, iters))
        if a is None:
            return None
        return a

    lines = []
    width = max([len(d) for d in datasets] + [12])
    header = "dataset".ljust(width) + "".join(label.rjust(22) for _, _, label in columns)
    lines.append("Test accuracy (mean +/- std over runs)")
    lines.append(header)
    for d in datasets:
        row = d.ljust(width)
        for method, iters, _ in columns:
            a = cell(d, method, iters)
            if a is None:
                row += "-".rjust(22)
            elif a.std_test is None:
                row += f"{100 * a.mean_test:.2f}".rjust(22)
            else:
                row += f"{100 * a.mean_test:.2f} +/- {100 * a.std_test:.2f}".rjust(22)
        lines.append(row)

    # delta of mean accuracy vs the gas baseline, averaged over datasets
    def gas_mean(d):
        keys = sorted(i for dd, m, i in agg if dd == d and m == "gas")
        return agg[(d, "gas", keys[0])].mean_test if keys else None

    deltas = []
    for method, iters, label in columns:
        diff = []
        for d in datasets:
            a = cell(d, method, iters)
            base = gas_mean(d)
            if a is not None and base is not None:
                diff.append(a.mean_test - base)
        deltas.append(float(np.mean(diff)) * 100 if diff else 0.0)
    row = "delta mean acc".ljust(width)
    for delta in deltas:
        row += f"{delta:+.2f}".rjust(22)
    lines.append(row)

    lines.append("")
    lines.append("Training time (s, mean over runs)")
    lines.append(header)
    for d in datasets:
        row = d.ljust(width)
        for method, iters, _ in columns:
            a = cell(d, method, iters)
            row += ("-" if a is None else f"{a.mean_time:.1f}").rjust(22)
        lines.append(row)

    gas_by_dataset = {d: m for d in datasets if (m := gas_mean(d)) is not None}
    if gas_by_dataset and wavegas_iters:
        lines.append("")
        lines.append("One-sided Wilcoxon (wavegas greater than gas), per iteration count")
        for iters in wavegas_iters:
            shared = [d for d in datasets if d in gas_by_dataset and (d, "wavegas", iters) in agg]
            if not shared:
                continue
            a = [agg[(d, "wavegas", iters)].mean_test for d in shared]
            b = [gas_by_dataset[d] for d in shared]
            res = wilcoxon_one_sided(a, b)
            lines.append(f"I={iters}: n={res.n} W={res.w_plus:g} p={res.p_value:.4f}")
    return "\n".join(lines)


def check_same_datasets(row_sets: list[tuple[Path, list[ResultRow]]]) -> None:
    baseline = {r.dataset for r in row_sets[0][1]}
    for path, rows in row_sets[1:]:
        got = {r.dataset for r in rows}
        if got != baseline:
            missing = sorted(baseline - got)
            extra = sorted(got - baseline)
            raise DatasetError(
                f"dataset sets differ between {row_sets[0][0]} and {path}: "
                f"missing {missing or 'none'}, extra {extra or 'none'}"
            )


# ---------------------------------------------------------------------------
# subcommands


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--data", help="dataset directory (or name under $WAVEGAS_DATA_DIR)")
    src.add_argument("--synth", help="synthetic graph spec, e.g. sbm:4x25")
    p.add_argument("--partitions", type=int, default=1)
    p.add_argument("--batch-parts", type=int, default=1)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--hidden", type=int, default=16)
    p.add_argument("--dropout", type=float, default=0.5)
    p.add_argument("--weight-decay", type=float, default=5e-4)
    p.add_argument("--seed", type=int, default=0, help="base seed; run i uses seed+i")
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p.add_argument("--jac-budget", type=int, default=10_000_000)
    p.add_argument("--residual", action="store_true")
    p.add_argument("--batched-eval", action="store_true")
    p.add_argument("--staleness-csv", default=None)
    p.add_argument("--out", default="results.csv")


def _base_config(args) -> TrainConfig:
    return TrainConfig(
        epochs=args.epochs,
        partitions=args.partitions,
        batch_parts=args.batch_parts,
        lr=args.lr,
        seed=args.seed,
        hidden=args.hidden,
        dropout=args.dropout,
        weight_decay=args.weight_decay,
        residual_mode=args.residual,
        jac_budget=args.jac_budget,
        batched_eval=args.batched_eval,
        staleness_csv=args.staleness_csv,
    )


def cmd_train(args) -> int:
    g, label = resolve_dataset(args)
    base = _base_config(args)
    base.wave_iters = args.iters
    spec = ExperimentSpec(label, [args.method], [args.iters], args.runs, Path(args.out), base, args.jobs)
    records = run_experiments(spec, g)
    append_records(spec.out, records)
    for rec in records:
        print(rec.to_csv_row())
    print(f"wrote {len(records)} row(s) to {spec.out}")
    return 0


def parse_iters_range(text: str) -> list[int]:
    if ":" in text:
        lo, hi = text.split(":", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(x) for x in text.split(",")]


def cmd_sweep(args) -> int:
    g, label = resolve_dataset(args)
    iters = parse_iters_range(args.iters)
    base = _base_config(args)
    spec = ExperimentSpec(label, ["wavegas"], iters, args.runs, Path(args.out), base, args.jobs)
    records = run_experiments(spec, g)
    append_records(spec.out, records)

    summary_lines = ["I,mean_val,std_val,mean_test,std_test,mean_time_s"]
    by_iters: dict[int, list[RunRecord]] = {}
    for rec in records:
        by_iters.setdefault(rec.wave_iters, []).append(rec)
    stats = {}
    for i in sorted(by_iters):
        val = np.array([r.best_val_acc for r in by_iters[i]])
        test = np.array([r.test_acc for r in by_iters[i]])
        t = np.array([r.wall_time_s for r in by_iters[i]])
        stats[i] = (val.mean(), val.std(ddof=1) if len(val) > 1 else 0.0,
                    test.mean(), test.std(ddof=1) if len(test) > 1 else 0.0, t.mean())
        summary_lines.append(
            f"{i},{stats[i][0]:.6f},{stats[i][1]:.6f},{stats[i][2]:.6f},{stats[i][3]:.6f},{stats[i][4]:.3f}"
        )
    summary_path = Path(args.out).with_suffix(".summary.csv")
    summary_path.write_text("\n".join(summary_lines) + "\n")

    best_i = max(stats, key=lambda i: stats[i][0])
    print("\n".join(summary_lines))
    print(f"best I by validation mean: {best_i} "
          f"(val {stats[best_i][0]:.4f}, test {stats[best_i][2]:.4f})")
    avg_band = [i for i in stats if 2 <= i <= 6]
    if avg_band:
        avg_test = float(np.mean([stats[i][2] for i in avg_band]))
        print(f"avg test accuracy over I in [2,6]: {avg_test:.4f}")
    print(f"wrote {len(records)} row(s) to {args.out}; summary in {summary_path}")
    return 0


def cmd_report(args) -> int:
    row_sets = [(Path(p), read_results(Path(p))) for p in args.csv]
    check_same_datasets(row_sets)
    rows = [r for _, rs in row_sets for r in rs]
    print(format_report(rows))
    return 0


def cmd_stats(args) -> int:
    if args.test != "wilcoxon":
        raise DatasetError(f"unknown test {args.test!r}")
    rows_a = read_results(Path(args.a))
    rows_b = read_results(Path(args.b))
    check_same_datasets([(Path(args.a), rows_a), (Path(args.b), rows_b)])

    def per_dataset_mean(rows):
        groups: dict[str, list[float]] = {}
        for r in rows:
            groups.setdefault(r.dataset, []).append(r.test_acc)
        return {d: float(np.mean(v)) for d, v in groups.items()}

    mean_a = per_dataset_mean(rows_a)
    mean_b = per_dataset_mean(rows_b)
    datasets = sorted(mean_a)
    res = wilcoxon_one_sided([mean_a[d] for d in datasets], [mean_b[d] for d in datasets])
    print(f"n={res.n} W={res.w_plus:g} p={res.p_value:.6g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wavegas-lab", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="run one method for N seeded runs")
    _add_common_flags(p_train)
    p_train.add_argument("--method", required=True, choices=["full", "gas", "wavegas", "gradas"])
    p_train.add_argument("--iters", type=int, default=1, help="refresh iterations for wavegas")
    p_train.set_defaults(func=cmd_train)

    p_sweep = sub.add_parser("sweep", help="sweep wavegas iteration counts")
    _add_common_flags(p_sweep)
    p_sweep.add_argument("--iters", default="1:11", help="range lo:hi or comma list")
    p_sweep.set_defaults(func=cmd_sweep)

    p_report = sub.add_parser("report", help="aggregate results CSVs into tables")
    p_report.add_argument("--csv", nargs="+", required=True)
    p_report.set_defaults(func=cmd_report)

    p_stats = sub.add_parser("stats", help="significance tests on results CSVs")
    p_stats.add_argument("test", choices=["wilcoxon"])
    p_stats.add_argument("--a", required=True, help="results CSV for the greater-than side")
    p_stats.add_argument("--b", required=True, help="results CSV for the baseline side")
    p_stats.set_defaults(func=cmd_stats)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DatasetError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
