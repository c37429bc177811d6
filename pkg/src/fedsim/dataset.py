"""Multilabel image dataset container, label statistics, and splits.

Images are float64 tensors of shape (H, W, C) with values in [0, 1];
labels are binary vectors over a shared vocabulary. Datasets are
immutable after construction and safe to share between threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Sample:
    """One image with its binary label vector."""

    image: np.ndarray
    labels: np.ndarray


@dataclass(frozen=True)
class MultilabelDataset:
    """A stack of same-shape images plus an (N, L) binary label matrix.

    label_names fixes the vocabulary order; column l of `labels`
    corresponds to label_names[l].
    """

    images: np.ndarray
    labels: np.ndarray
    label_names: tuple[str, ...]

    def __post_init__(self):
        images = np.asarray(self.images, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.uint8)
        object.__setattr__(self, "images", images)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "label_names", tuple(self.label_names))
        if images.ndim != 4:
            raise ValueError(f"images must be (N, H, W, C), got shape {images.shape}")
        if labels.ndim != 2 or labels.shape[0] != images.shape[0]:
            raise ValueError(
                f"labels must be (N, L) with N={images.shape[0]}, got {labels.shape}"
            )
        if labels.shape[1] != len(self.label_names):
            raise ValueError(
                f"{labels.shape[1]} label columns but {len(self.label_names)} label names"
            )
        if len(set(self.label_names)) != len(self.label_names):
            raise ValueError("label names must be unique")
        if any(not name for name in self.label_names):
            raise ValueError("label names must be nonempty")
        if images.size and (images.min() < 0.0 or images.max() > 1.0):
            raise ValueError("pixel values must lie in [0, 1]")
        if labels.size and not np.isin(labels, (0, 1)).all():
            raise ValueError("label entries must be 0 or 1")
        images.flags.writeable = False
        labels.flags.writeable = False

    def __len__(self) -> int:
        return self.images.shape[0]

    def __getitem__(self, i: int) -> Sample:
        return Sample(self.images[i], self.labels[i])

    @property
    def shape(self) -> tuple[int, int, int]:
        """(H, W, C) of every image in the dataset."""
        return tuple(self.images.shape[1:])

    @property
    def n_labels(self) -> int:
        return self.labels.shape[1]

    def subset(self, indices) -> "MultilabelDataset":
        """New dataset holding the given sample indices, in the given order."""
        idx = np.asarray(indices, dtype=np.int64)
        return MultilabelDataset(self.images[idx], self.labels[idx], self.label_names)


@dataclass(frozen=True)
class LabelStats:
    """Per-label occurrence counts and the L x L cosine co-occurrence matrix."""

    counts: np.ndarray
    cosine: np.ndarray


def label_stats(ds: MultilabelDataset) -> LabelStats:
    """Count label occurrences and compute pairwise cosine similarity.

    cosine[i, j] is the cosine between the binary indicator columns of
    labels i and j over all samples. Labels that never occur get an
    all-zero row and column (including the diagonal) instead of NaN.
    """
    if len(ds) == 0:
        raise ValueError("label_stats requires a nonempty dataset")
    cols = ds.labels.astype(np.float64)
    counts = ds.labels.sum(axis=0).astype(np.int64)
    gram = cols.T @ cols
    norms = np.sqrt(counts.astype(np.float64))
    denom = np.outer(norms, norms)
    with np.errstate(invalid="ignore", divide="ignore"):
        cosine = np.where(denom > 0, gram / np.where(denom > 0, denom, 1.0), 0.0)
    present = counts > 0
    cosine[np.ix_(~present, np.arange(len(counts)))] = 0.0
    cosine[np.ix_(np.arange(len(counts)), ~present)] = 0.0
    # exact 1.0 on the diagonal for present labels; sqrt(n)^2 can be off an ulp
    diag = np.where(present, 1.0, 0.0)
    np.fill_diagonal(cosine, diag)
    return LabelStats(counts=counts, cosine=cosine)


def split_common_labels(
    stats: LabelStats, n_samples: int, threshold: float = 0.10
) -> tuple[np.ndarray, np.ndarray]:
    """Split label indices into (common, less_common) by relative frequency.

    A label is common when its count exceeds threshold * n_samples.
    Zero-count labels belong to neither set.
    """
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must be in (0, 1), got {threshold}")
    counts = stats.counts
    common = np.flatnonzero(counts > threshold * n_samples)
    less_common = np.flatnonzero((counts > 0) & (counts <= threshold * n_samples))
    return common, less_common


def train_val_split(
    ds: MultilabelDataset, val_fraction: float, seed: int
) -> tuple[MultilabelDataset, MultilabelDataset]:
    """Disjoint, exhaustive, seed-deterministic train/validation split.

    The validation side gets round(val_fraction * n) samples (half away
    from an integer rounds up).
    """
    if not 0.0 < val_fraction < 1.0:
        raise ValueError(f"val_fraction must be in (0, 1), got {val_fraction}")
    n = len(ds)
    if n < 2:
        raise ValueError("need at least 2 samples to split")
    n_val = int(np.floor(val_fraction * n + 0.5))
    if n_val == 0 or n_val == n:
        raise ValueError(
            f"val_fraction={val_fraction} with n={n} leaves one side empty"
        )
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    return ds.subset(np.sort(perm[n_val:])), ds.subset(np.sort(perm[:n_val]))
