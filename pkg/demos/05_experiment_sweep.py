#!/usr/bin/env python3
"""Run a small experiment grid and persist per-round CSV results.

The same flow as the `fedsim sweep` CLI subcommand: rows in, one
run-<id>.csv per row plus a summary.csv. Feed the CSVs to
plots/render.py for figures.
"""

import tempfile
from pathlib import Path

from fedsim import (
    ExperimentRow,
    RunOutput,
    run_sweep,
    ucm_like,
    write_run_csv,
    write_summary_csv,
)

ds = ucm_like(n=300, shape=(16, 16, 3), seed=2)

rows = [
    ExperimentRow("mlp", "Centralized", epochs=10, batch_size=8, seed=1),
    ExperimentRow("mlp", "BSP", epochs=10, clients=4, batch_size=8,
                  skewness=40.0, small_skew=True, seed=1),
    ExperimentRow("mlp", "FedAvg", epochs=10, clients=4, batch_size=8,
                  c_fraction=0.75, skewness=40.0, client_epochs=2,
                  small_skew=True, seed=1),
    ExperimentRow("mlp", "BSPMax", epochs=10, clients=4, batch_size=8,
                  skewness=40.0, small_skew=True, seed=1),
]

results = run_sweep(rows, ds, parallelism=2)

out_dir = Path(tempfile.mkdtemp(prefix="fedsim_sweep_"))
for res in results:
    assert isinstance(res, RunOutput), res
    write_run_csv(out_dir / f"run-{res.run_id}.csv", res)
    s = res.summary
    print(f"{res.row.fl_algorithm:12s} run {res.run_id}: "
          f"final f1 {s['final_f1']:.3f}, max f1 {s['max_f1']:.3f}, "
          f"{s['total_bytes'] / 1024:9.1f} KiB moved")
write_summary_csv(out_dir / "summary.csv", results)

print(f"\nresults written to {out_dir}")
print("render figures with, e.g.:")
csvs = " ".join(str(p) for p in sorted(out_dir.glob("run-*.csv")))
print(f"  python plots/render.py --kind learning_curves --out curves.png {csvs}")
print(f"  python plots/render.py --kind bar_comm --out comm.png {csvs}")
