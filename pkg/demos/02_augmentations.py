#!/usr/bin/env python3
"""Apply the four corruption augmentations and double a dataset.

Each corrupted image keeps its labels; the augmented dataset holds the
originals as a prefix, then one corrupted copy per original with the
corruption kind assigned round-robin.
"""

import numpy as np

from fedsim import Corruption, CorruptionKind, augment_double, corrupt, maybe_hflip, ucm_like

ds = ucm_like(n=8, shape=(16, 16, 3), seed=1)
img = ds.images[0]

print("corruptions on one image (mean |pixel delta| per kind):")
for variant in Corruption:
    out = corrupt(img, CorruptionKind(variant), seed=42)
    delta = np.abs(out - img).mean()
    print(f"  {variant.value:14s} mean delta {delta:.4f}, range "
          f"[{out.min():.2f}, {out.max():.2f}]")

doubled = augment_double(ds, seed=3)
print(f"\naugment_double: {len(ds)} -> {len(doubled)} samples")
print("originals preserved as prefix:",
      np.array_equal(doubled.images[: len(ds)], ds.images))
print("labels copied to corrupted half:",
      np.array_equal(doubled.labels[len(ds):], ds.labels))

flipped = maybe_hflip(img, rng_draw=0.1)
kept = maybe_hflip(img, rng_draw=0.9)
print("\nhorizontal flip: draw 0.1 flips ->", not np.array_equal(flipped, img),
      "| draw 0.9 keeps ->", np.array_equal(kept, img))
