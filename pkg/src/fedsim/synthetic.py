"""Seeded synthetic multilabel image generator.

The generator mimics the label structure of a small aerial-imagery
corpus: a handful of frequent, strongly co-occurring labels plus many
rare, mutually decorrelated ones. Every present label stamps a solid
rectangle of a label-specific color at a label-specific grid cell, so
presence is linearly detectable and a small CNN can fit it well.

Rare (ungrouped) labels are drawn from one categorical per sample, so
two rare labels never share an image; grouped labels mix a shared
group-level uniform with a private one, which makes them co-occur far
more often than independence would allow.
"""

from __future__ import annotations

import numpy as np

from .dataset import MultilabelDataset

# probability that a grouped label reads the group's shared uniform
# instead of its private one; pairwise co-occurrence becomes
# share^2 * min(f_i, f_j) + (1 - share^2) * f_i * f_j
_GROUP_SHARE = 0.5

_COLOR_LEVELS = (0.05, 0.5, 0.95)


def _label_color(label: int, n_labels: int, channels: int) -> np.ndarray:
    """Distinct per-label stamp color, snapped to the 8-bit grid."""
    if 3 ** channels >= n_labels + 1:
        digits = [(label + 1) // 3 ** c % 3 for c in range(channels)]
        color = np.array([_COLOR_LEVELS[d] for d in digits])
    else:
        color = np.full(channels, (label + 1) / (n_labels + 1))
    return np.floor(color * 255.0 + 0.5) / 255.0


def _draw_label_rows(rng, n_rows, freqs, groups, ungrouped, force_nonempty=False):
    bits = np.zeros((n_rows, len(freqs)), dtype=np.uint8)
    for group in groups:
        shared = rng.random(n_rows)
        for l in group:
            private = rng.random(n_rows)
            use_shared = rng.random(n_rows) < _GROUP_SHARE
            draw = np.where(use_shared, shared, private)
            bits[:, l] = draw < freqs[l]
    if ungrouped:
        edges = np.cumsum([freqs[l] for l in ungrouped])
        t = rng.random(n_rows)
        if force_nonempty and edges[-1] < 1.0:
            # rows that would stay all-zero rescale their categorical draw
            # into the firing range; grouped marginals stay untouched
            empty = (bits.sum(axis=1) == 0) & (t >= edges[-1])
            t = np.where(empty, (t - edges[-1]) / (1.0 - edges[-1]) * edges[-1], t)
        pick = np.searchsorted(edges, t, side="right")
        for j, l in enumerate(ungrouped):
            bits[pick == j, l] = 1
    return bits


def generate_synthetic(
    n: int,
    shape: tuple[int, int, int],
    label_freqs,
    cooccur_groups,
    seed: int,
    label_names=None,
) -> MultilabelDataset:
    """Generate n samples with the requested marginal label frequencies.

    Each label l lands in roughly n * label_freqs[l] samples. Ungrouped
    labels never co-occur with each other; a sample that would end up
    unlabeled is given an ungrouped label instead (which nudges those
    counts up slightly), so every sample carries at least one label.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    h, w, c = shape
    freqs = [float(f) for f in label_freqs]
    n_labels = len(freqs)
    for f in freqs:
        if not 0.0 < f <= 1.0:
            raise ValueError(f"label frequency {f} outside (0, 1]")
    grouped: set[int] = set()
    for group in cooccur_groups:
        for l in group:
            if not 0 <= l < n_labels:
                raise ValueError(f"group label index {l} out of range")
            if l in grouped:
                raise ValueError(f"label {l} appears in more than one group")
            grouped.add(l)
    ungrouped = [l for l in range(n_labels) if l not in grouped]
    if sum(freqs[l] for l in ungrouped) > 1.0 + 1e-12:
        raise ValueError("ungrouped label frequencies must sum to at most 1")
    if label_names is None:
        label_names = tuple(f"label_{i:02d}" for i in range(n_labels))

    grid = int(np.ceil(np.sqrt(n_labels)))
    if h // grid == 0 or w // grid == 0:
        raise ValueError(f"image {h}x{w} too small for {n_labels} label cells")
    cell_h, cell_w = h // grid, w // grid

    rng = np.random.default_rng(seed)
    labels = _draw_label_rows(
        rng, n, freqs, cooccur_groups, ungrouped, force_nonempty=bool(ungrouped)
    )
    # with no ungrouped labels the nonempty guarantee falls back to redraws
    for _ in range(1000):
        empty = np.flatnonzero(labels.sum(axis=1) == 0)
        if empty.size == 0:
            break
        labels[empty] = _draw_label_rows(rng, empty.size, freqs, cooccur_groups, ungrouped)
    else:
        raise RuntimeError("could not draw a nonempty label set for every sample")

    # byte-grid background noise so a PPM round trip is lossless
    images = rng.integers(0, 256, size=(n, h, w, c)).astype(np.float64) / 255.0
    colors = [_label_color(l, n_labels, c) for l in range(n_labels)]
    for l in range(n_labels):
        r0 = (l // grid) * cell_h
        c0 = (l % grid) * cell_w
        present = labels[:, l] == 1
        images[present, r0 : r0 + cell_h, c0 : c0 + cell_w, :] = colors[l]

    return MultilabelDataset(images, labels, tuple(label_names))


def ucm_like(
    n: int,
    shape: tuple[int, int, int] = (32, 32, 3),
    n_common: int = 6,
    n_rare: int = 10,
    common_freq: float = 0.4,
    rare_freq: float = 0.06,
    seed: int = 0,
) -> MultilabelDataset:
    """Preset with a correlated common-label group and decorrelated rare labels."""
    freqs = [common_freq] * n_common + [rare_freq] * n_rare
    names = tuple(
        [f"common_{i}" for i in range(n_common)] + [f"rare_{i}" for i in range(n_rare)]
    )
    return generate_synthetic(
        n,
        shape,
        freqs,
        cooccur_groups=[list(range(n_common))] if n_common > 1 else [],
        seed=seed,
        label_names=names,
    )
