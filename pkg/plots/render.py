#!/usr/bin/env python3
"""Render comparison charts from federated-run CSV files.

Consumes only the run-CSV contract (header: round, f1, accuracy,
classification_accuracy, cumulative_bytes, wall_seconds) and writes one
image per invocation:

    learning_curves  f1 versus round, one curve per input CSV
    bar_runtime      total wall-clock seconds per run
    bar_comm         total transferred bytes per run
    bar_maxf1        best f1 reached per run

Usage:
    python plots/render.py --kind learning_curves --out curves.png \
        run-a.csv run-b.csv run-c.csv --labels "C=0.5,C=0.75,C=1"
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

EXPECTED_HEADER = (
    "round", "f1", "accuracy", "classification_accuracy",
    "cumulative_bytes", "wall_seconds",
)
KINDS = ("learning_curves", "bar_runtime", "bar_comm", "bar_maxf1")


class RenderError(ValueError):
    """Raised for unusable inputs; the CLI turns it into exit code 1."""


@dataclass(frozen=True)
class PlotSpec:
    kind: str
    inputs: tuple[str, ...]
    labels: tuple[str, ...]
    out: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise RenderError(f"unknown kind {self.kind!r}; choose from {KINDS}")
        if not self.inputs:
            raise RenderError("at least one input CSV is required")
        if len(self.labels) != len(self.inputs):
            raise RenderError(
                f"{len(self.labels)} labels for {len(self.inputs)} inputs"
            )


def load_run(path):
    """Parse one run CSV into a dict of columns; strict about the header."""
    p = Path(path)
    if not p.is_file():
        raise RenderError(f"missing input file {path}")
    with open(p, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        try:
            header = tuple(next(reader))
        except StopIteration:
            raise RenderError(f"{path}: empty file") from None
        if header != EXPECTED_HEADER:
            raise RenderError(f"{path}: malformed header {header}")
        rows = [r for r in reader if r]
    if not rows:
        raise RenderError(f"{path}: no data rows")
    try:
        return {
            "round": [int(r[0]) for r in rows],
            "f1": [float(r[1]) for r in rows],
            "cumulative_bytes": [int(r[4]) for r in rows],
            "wall_seconds": [float(r[5]) for r in rows],
        }
    except (ValueError, IndexError) as e:
        raise RenderError(f"{path}: unparseable row: {e}") from None


def build_figure(spec: PlotSpec):
    """Build the requested figure; separated from plot() so tests can inspect it."""
    runs = [load_run(p) for p in spec.inputs]
    fig, ax = plt.subplots(figsize=(7, 4.5), dpi=120)
    if spec.kind == "learning_curves":
        for run, label in zip(runs, spec.labels):
            ax.plot(run["round"], run["f1"], label=label, linewidth=1.5)
        ax.set_xlabel("round")
        ax.set_ylabel("F1 score")
        ax.set_ylim(0.0, 1.0)
        ax.legend()
    else:
        values = {
            "bar_runtime": [sum(r["wall_seconds"]) for r in runs],
            "bar_comm": [r["cumulative_bytes"][-1] for r in runs],
            "bar_maxf1": [max(r["f1"]) for r in runs],
        }[spec.kind]
        ylabel = {
            "bar_runtime": "total wall seconds",
            "bar_comm": "total transferred bytes",
            "bar_maxf1": "max F1 score",
        }[spec.kind]
        ax.bar(range(len(values)), values, color="tab:blue")
        ax.set_xticks(range(len(values)))
        ax.set_xticklabels(spec.labels, rotation=20, ha="right")
        ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    return fig


def plot(spec: PlotSpec) -> Path:
    """Render and write the image; nothing is written on error."""
    fig = build_figure(spec)
    out = Path(spec.out)
    fig.savefig(out)
    plt.close(fig)
    return out


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("inputs", nargs="+", help="run CSV files")
    parser.add_argument("--labels", help="comma-separated legend labels")
    args = parser.parse_args(argv)
    labels = (
        tuple(args.labels.split(","))
        if args.labels
        else tuple(Path(p).stem for p in args.inputs)
    )
    try:
        spec = PlotSpec(args.kind, tuple(args.inputs), labels, args.out)
        out = plot(spec)
    except RenderError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
