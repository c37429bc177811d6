"""Command-line surface: synth, stats, partition, run, sweep."""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from .dataset import label_stats
from .experiment import (
    ExperimentRow,
    RunOutput,
    load_rows,
    run_experiment,
    run_sweep,
    write_run_csv,
    write_summary_csv,
)
from .partition import SkewConfig, make_partition, skew_report
from .ppm import load_dataset, save_dataset
from .synthetic import ucm_like


def _add_synth(sub):
    p = sub.add_parser("synth", help="write a synthetic dataset directory")
    p.add_argument("--n", type=int, required=True, help="number of samples")
    p.add_argument("--labels-common", type=int, default=6)
    p.add_argument("--labels-rare", type=int, default=10)
    p.add_argument("--common-freq", type=float, default=0.4)
    p.add_argument("--rare-freq", type=float, default=0.06)
    p.add_argument("--size", type=int, default=32, help="image edge length")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output dataset directory")


def _add_stats(sub):
    p = sub.add_parser("stats", help="emit label count and cosine CSVs")
    p.add_argument("--data-dir", required=True)
    p.add_argument("--out-dir", required=True)


def _add_partition(sub):
    p = sub.add_parser("partition", help="print a skew report as CSV")
    p.add_argument("--data-dir", required=True)
    p.add_argument("--clients", type=int, required=True)
    p.add_argument("--skew", type=float, default=0.0, help="skew percentage in [0, 100]")
    p.add_argument("--small-skew", action="store_true",
                   help="monopolize less-common labels instead of common ones")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write CSV here instead of stdout")


def _row_flags(p):
    p.add_argument("--model", required=True,
                   help="linear | mlp | lenet | tiny_residual (aliases: LeNet, ResNet, AlexNet)")
    p.add_argument("--algorithm", required=True,
                   help="centralized | bsp | bsp_max | fedavg | fedprox")
    p.add_argument("--rounds", type=int, required=True)
    p.add_argument("--clients", type=int)
    p.add_argument("--batch-size", type=int, default=4)
    p.add_argument("--c-fraction", type=float)
    p.add_argument("--skewness", type=float)
    p.add_argument("--client-epochs", type=int)
    p.add_argument("--small-skew", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mu", type=float, default=0.01)


def _add_run(sub):
    p = sub.add_parser("run", help="run one experiment row")
    p.add_argument("--data-dir", required=True)
    p.add_argument("--out", required=True, help="directory for run-<id>.csv")
    _row_flags(p)


def _add_sweep(sub):
    p = sub.add_parser("sweep", help="run every row of a grid CSV")
    p.add_argument("--config", required=True, help="grid CSV path")
    p.add_argument("--data-dir", required=True)
    p.add_argument("--out", required=True, help="results directory")
    p.add_argument("--jobs", type=int, default=1)


def _cmd_synth(args) -> int:
    ds = ucm_like(
        n=args.n,
        shape=(args.size, args.size, 3),
        n_common=args.labels_common,
        n_rare=args.labels_rare,
        common_freq=args.common_freq,
        rare_freq=args.rare_freq,
        seed=args.seed,
    )
    save_dataset(ds, args.out)
    print(f"wrote {len(ds)} samples, {ds.n_labels} labels to {args.out}")
    return 0


def _cmd_stats(args) -> int:
    ds = load_dataset(args.data_dir)
    stats = label_stats(ds)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "label_counts.csv", "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["label", "count"])
        for name, count in zip(ds.label_names, stats.counts):
            writer.writerow([name, int(count)])
    with open(out / "label_cosine.csv", "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["label", *ds.label_names])
        for name, row in zip(ds.label_names, stats.cosine):
            writer.writerow([name, *[repr(float(v)) for v in row]])
    print(f"wrote label_counts.csv and label_cosine.csv to {out}")
    return 0


def _cmd_partition(args) -> int:
    ds = load_dataset(args.data_dir)
    stats = label_stats(ds)
    cfg = SkewConfig(
        n_clients=args.clients, skew_pct=args.skew,
        small_skew=args.small_skew, seed=args.seed,
    )
    plan = make_partition(ds, stats, cfg)
    counts = skew_report(plan, ds)
    sink = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(sink)
        writer.writerow(["client", "label", "count"])
        for k in range(plan.n_clients):
            for l, name in enumerate(ds.label_names):
                writer.writerow([k, name, int(counts[k, l])])
    finally:
        if args.out:
            sink.close()
    return 0


def _row_from_args(args) -> ExperimentRow:
    return ExperimentRow(
        dl_model=args.model,
        fl_algorithm=args.algorithm,
        epochs=args.rounds,
        clients=args.clients,
        batch_size=args.batch_size,
        c_fraction=args.c_fraction,
        skewness=args.skewness,
        client_epochs=args.client_epochs,
        small_skew=args.small_skew,
        seed=args.seed,
        mu=args.mu,
    )


def _cmd_run(args) -> int:
    ds = load_dataset(args.data_dir)
    row = _row_from_args(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    output = run_experiment(row, ds)
    path = out_dir / f"run-{output.run_id}.csv"
    write_run_csv(path, output)
    s = output.summary
    print(
        f"run {output.run_id}: max_f1={s['max_f1']:.4f} "
        f"final_f1={s['final_f1']:.4f} bytes={s['total_bytes']}"
    )
    print(f"wrote {path}")
    return 0


def _cmd_sweep(args) -> int:
    ds = load_dataset(args.data_dir)
    rows = load_rows(args.config)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    results = run_sweep(rows, ds, parallelism=args.jobs)
    failures = 0
    for res in results:
        if isinstance(res, RunOutput):
            write_run_csv(out_dir / f"run-{res.run_id}.csv", res)
        else:
            failures += 1
            print(
                f"row ({res.row.dl_model}, {res.row.fl_algorithm}) failed "
                f"at stage {res.stage}: {res.message}",
                file=sys.stderr,
            )
    write_summary_csv(out_dir / "summary.csv", results)
    print(f"{len(results) - failures}/{len(results)} runs succeeded; results in {out_dir}")
    return 1 if failures else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fedsim",
        description="Deterministic federated-learning simulation on multilabel image data",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    _add_synth(sub)
    _add_stats(sub)
    _add_partition(sub)
    _add_run(sub)
    _add_sweep(sub)
    args = parser.parse_args(argv)
    handlers = {
        "synth": _cmd_synth,
        "stats": _cmd_stats,
        "partition": _cmd_partition,
        "run": _cmd_run,
        "sweep": _cmd_sweep,
    }
    try:
        return handlers[args.command](args)
    except Exception as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
