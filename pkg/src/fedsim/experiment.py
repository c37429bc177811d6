"""Grid-driven experiment execution and CSV persistence.

An experiment row mirrors the parameter-grid columns (model, algorithm,
rounds, clients, batch size, client fraction, skewness, client epochs,
small-skew flag) plus two extensions: the run seed and the FedProx mu.
Rows come from a CSV whose header uses those column names; `NA` marks
fields an algorithm does not use.

Every run writes one `run-<id>.csv` of per-round records; a sweep adds
a `summary.csv`. Run ids hash the row and the dataset content, so
identical inputs produce identical ids on any machine.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .augment import augment_double
from .dataset import MultilabelDataset, label_stats, train_val_split
from .federation import (
    FederationConfig,
    RoundRecord,
    run_bsp,
    run_bsp_max,
    run_centralized,
    run_fedavg,
)
from .models import LearnerSpec
from .partition import SkewConfig, make_partition

log = logging.getLogger(__name__)

VAL_FRACTION = 0.2

RUN_CSV_FIELDS = (
    "round", "f1", "accuracy", "classification_accuracy",
    "cumulative_bytes", "wall_seconds",
)

_ALGORITHMS = {
    "centralized": "centralized",
    "bsp": "bsp",
    "bspmax": "bsp_max",
    "bsp-max": "bsp_max",
    "bsp_max": "bsp_max",
    "fedavg": "fedavg",
    "fedprox": "fedprox",
}

# grid model names -> learner architectures; the classic big nets map to
# desk-scale stand-ins with the same structural idea
_MODELS = {
    "linear": "linear",
    "mlp": "mlp",
    "alexnet": "mlp",
    "lenet": "lenet",
    "lenetstyle": "lenet",
    "resnet": "tiny_residual",
    "tinyresidual": "tiny_residual",
    "tiny_residual": "tiny_residual",
}


@dataclass(frozen=True)
class ExperimentRow:
    dl_model: str
    fl_algorithm: str
    epochs: int
    clients: int | None = None
    batch_size: int = 4
    c_fraction: float | None = None
    skewness: float | None = None
    client_epochs: int | None = None
    small_skew: bool | None = None
    seed: int = 0
    mu: float = 0.01

    def __post_init__(self):
        if self.dl_model.lower() not in _MODELS:
            raise ValueError(f"unknown model {self.dl_model!r}")
        if self.fl_algorithm.lower() not in _ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.fl_algorithm!r}")

    @property
    def algorithm(self) -> str:
        return _ALGORITHMS[self.fl_algorithm.lower()]

    @property
    def architecture(self) -> str:
        return _MODELS[self.dl_model.lower()]


@dataclass(frozen=True)
class RunOutput:
    run_id: str
    row: ExperimentRow
    records: tuple[RoundRecord, ...]

    @property
    def summary(self) -> dict:
        return {
            "max_f1": max(r.f1 for r in self.records),
            "final_f1": self.records[-1].f1,
            "total_bytes": self.records[-1].cumulative_bytes,
            "total_wall_seconds": sum(r.wall_seconds for r in self.records),
        }


@dataclass(frozen=True)
class RunFailure:
    row: ExperimentRow
    stage: str
    message: str


class ExperimentError(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage


def dataset_id(ds: MultilabelDataset) -> str:
    """Content hash of a dataset, stable across machines."""
    h = hashlib.sha256()
    h.update(";".join(ds.label_names).encode())
    h.update(np.clip(np.floor(ds.images * 255.0 + 0.5), 0, 255).astype(np.uint8).tobytes())
    h.update(ds.labels.tobytes())
    return h.hexdigest()[:16]


def run_id(row: ExperimentRow, ds_id: str) -> str:
    canonical = json.dumps(
        {f.name: getattr(row, f.name) for f in fields(row)}, sort_keys=True
    )
    return hashlib.sha256(f"{canonical}|{ds_id}".encode()).hexdigest()[:12]


def _stage(name):
    def wrap(fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except Exception as e:
            raise ExperimentError(name, e) from e
    return wrap


def run_experiment(row: ExperimentRow, dataset: MultilabelDataset) -> RunOutput:
    """Full pipeline: augment, split, partition, orchestrate, record."""
    seed = row.seed
    algorithm = row.algorithm
    ds_id = dataset_id(dataset)

    augmented = _stage("augment")(augment_double, dataset, seed)
    train, val = _stage("split")(train_val_split, augmented, VAL_FRACTION, seed)

    spec = LearnerSpec(row.architecture, dataset.shape, dataset.n_labels)
    cfg = FederationConfig(
        algorithm=algorithm,
        rounds=row.epochs,
        n_clients=row.clients or 1,
        c_fraction=row.c_fraction if row.c_fraction is not None else 1.0,
        local_epochs=row.client_epochs if row.client_epochs is not None else 1,
        batch_size=row.batch_size,
        mu=row.mu,
        seed=seed,
    )

    if algorithm == "centralized":
        if row.clients is not None:
            log.info("centralized run ignores clients=%s", row.clients)
        _, history, _ = _stage("train")(run_centralized, cfg, train, spec, val)
    else:
        if algorithm in ("bsp", "bsp_max") and (
            row.c_fraction is not None or (row.client_epochs or 1) != 1
        ):
            log.info(
                "%s ignores c_fraction=%s and fixes local epochs to 1",
                algorithm, row.c_fraction,
            )
        stats = _stage("stats")(label_stats, train)
        plan = _stage("partition")(
            make_partition, train, stats,
            SkewConfig(
                n_clients=cfg.n_clients,
                skew_pct=row.skewness or 0.0,
                small_skew=bool(row.small_skew),
                seed=seed,
            ),
        )
        runner = {"bsp": run_bsp, "bsp_max": run_bsp_max}.get(algorithm, run_fedavg)
        _, history, _ = _stage("train")(runner, cfg, train, plan, spec, val)

    return RunOutput(run_id(row, ds_id), row, tuple(history))


def run_sweep(rows, dataset: MultilabelDataset, parallelism: int = 1):
    """Run every row; failures are reported in place, not raised.

    The result list is aligned with the input rows and contains
    RunOutput or RunFailure entries.
    """
    if not rows:
        raise ValueError("no experiment rows")

    def one(row):
        try:
            return run_experiment(row, dataset)
        except ExperimentError as e:
            return RunFailure(row, e.stage, str(e))
        except Exception as e:  # row-level validation errors
            return RunFailure(row, "setup", str(e))

    if parallelism > 1:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            return list(pool.map(one, rows))
    return [one(row) for row in rows]


# ---------------------------------------------------------------- CSV I/O

_ROW_COLUMNS = {
    "dlmodel": "dl_model",
    "model": "dl_model",
    "flalgorithm": "fl_algorithm",
    "algorithm": "fl_algorithm",
    "epochs": "epochs",
    "rounds": "epochs",
    "clients": "clients",
    "batchsize": "batch_size",
    "cfraction": "c_fraction",
    "skewness": "skewness",
    "clientepochs": "client_epochs",
    "smallskew": "small_skew",
    "seed": "seed",
    "mu": "mu",
}

_ROW_TYPES = {
    "dl_model": str,
    "fl_algorithm": str,
    "epochs": int,
    "clients": int,
    "batch_size": int,
    "c_fraction": float,
    "skewness": float,
    "client_epochs": int,
    "small_skew": lambda s: s.strip().lower() in ("true", "1", "yes"),
    "seed": int,
    "mu": float,
}


def _normalize(column: str) -> str:
    return "".join(ch for ch in column.lower() if ch.isalnum())


def parse_rows(text: str) -> list[ExperimentRow]:
    """Parse a grid CSV into ExperimentRow objects. `NA` means unset."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ValueError("empty config file") from None
    mapped = []
    for col in header:
        key = _normalize(col)
        if key not in _ROW_COLUMNS:
            raise ValueError(f"unknown config column {col!r}")
        mapped.append(_ROW_COLUMNS[key])
    rows = []
    for line in reader:
        if not line or all(not cell.strip() for cell in line):
            continue
        kwargs = {}
        for col, cell in zip(mapped, line):
            cell = cell.strip()
            if not cell or cell.upper() == "NA":
                continue
            kwargs[col] = _ROW_TYPES[col](cell)
        rows.append(ExperimentRow(**kwargs))
    return rows


def load_rows(path) -> list[ExperimentRow]:
    return parse_rows(Path(path).read_text(encoding="utf-8"))


def write_run_csv(path, output: RunOutput) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(RUN_CSV_FIELDS)
        for r in output.records:
            writer.writerow(
                [r.round, repr(r.f1), repr(r.accuracy),
                 repr(r.classification_accuracy), r.cumulative_bytes,
                 repr(r.wall_seconds)]
            )


def read_run_csv(path) -> list[RoundRecord]:
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader)
        if tuple(header) != RUN_CSV_FIELDS:
            raise ValueError(f"unexpected run CSV header {header}")
        return [
            RoundRecord(int(r[0]), float(r[1]), float(r[2]), float(r[3]),
                        int(r[4]), float(r[5]))
            for r in reader
        ]


def write_summary_csv(path, results) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(
            ["run_id", "dl_model", "fl_algorithm", "status",
             "max_f1", "final_f1", "total_bytes", "total_wall_seconds", "error"]
        )
        for res in results:
            if isinstance(res, RunOutput):
                s = res.summary
                writer.writerow(
                    [res.run_id, res.row.dl_model, res.row.fl_algorithm, "ok",
                     repr(s["max_f1"]), repr(s["final_f1"]), s["total_bytes"],
                     repr(s["total_wall_seconds"]), ""]
                )
            else:
                writer.writerow(
                    ["", res.row.dl_model, res.row.fl_algorithm,
                     f"failed:{res.stage}", "", "", "", "", res.message]
                )
