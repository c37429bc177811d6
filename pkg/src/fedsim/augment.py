"""Image corruptions and the dataset-doubling augmentation pass.

Four corruption families are implemented as simplified parametric
analogues of the usual photographic corruption benchmarks: impulse
noise, horizontal motion blur, snow, and pixelation. All operate on
float images in [0, 1], preserve shape and range, and are deterministic
under an explicit seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.ndimage import uniform_filter1d

from .dataset import MultilabelDataset


class Corruption(Enum):
    IMPULSE_NOISE = "impulse_noise"
    MOTION_BLUR = "motion_blur"
    SNOW = "snow"
    PIXELATION = "pixelation"


_DEFAULT_SEVERITY = {
    Corruption.IMPULSE_NOISE: 0.05,  # per-pixel replacement probability
    Corruption.MOTION_BLUR: 5,       # box kernel length
    Corruption.SNOW: 0.02,           # fraction of pixels flaked
    Corruption.PIXELATION: 4,        # block edge length
}


@dataclass(frozen=True)
class CorruptionKind:
    variant: Corruption
    severity: float | int | None = None

    def __post_init__(self):
        if self.severity is None:
            object.__setattr__(self, "severity", _DEFAULT_SEVERITY[self.variant])
        s = self.severity
        if self.variant in (Corruption.IMPULSE_NOISE, Corruption.SNOW):
            if not 0.0 <= s <= 1.0:
                raise ValueError(f"{self.variant.value} severity must be in [0, 1]")
        else:
            if int(s) != s or s < 1:
                raise ValueError(f"{self.variant.value} severity must be an integer >= 1")
            object.__setattr__(self, "severity", int(s))


def default_corruptions() -> tuple[CorruptionKind, ...]:
    """The four kinds at default severity, in round-robin order."""
    return tuple(CorruptionKind(v) for v in Corruption)


def _impulse_noise(img, p, rng):
    mask = rng.random(img.shape) < p
    values = rng.integers(0, 2, size=img.shape).astype(np.float64)
    return np.where(mask, values, img)


def _motion_blur(img, k):
    # horizontal box filter; edges replicate (clamp)
    return uniform_filter1d(img, size=k, axis=1, mode="nearest")


def _snow(img, density, rng):
    h, w, _ = img.shape
    out = img.copy()
    n_flakes = int(np.floor(density * h * w + 0.5))
    if n_flakes == 0:
        return out
    flat = rng.choice(h * w, size=n_flakes, replace=False)
    ys, xs = flat // w, flat % w
    out[ys, xs, :] = 0.95
    below = ys + 1 < h
    out[ys[below] + 1, xs[below], :] = 0.95
    return out


def _pixelate(img, f):
    h, w, _ = img.shape
    ry = np.arange(0, h, f)
    rx = np.arange(0, w, f)
    sums = np.add.reduceat(np.add.reduceat(img, ry, axis=0), rx, axis=1)
    hbl = np.diff(np.append(ry, h))
    wbl = np.diff(np.append(rx, w))
    means = sums / (hbl[:, None] * wbl[None, :])[:, :, None]
    return np.repeat(np.repeat(means, hbl, axis=0), wbl, axis=1)


def corrupt(img: np.ndarray, kind: CorruptionKind, seed: int) -> np.ndarray:
    """Apply one corruption; same shape, values clamped back into [0, 1]."""
    img = np.asarray(img, dtype=np.float64)
    rng = np.random.default_rng(seed)
    if kind.variant is Corruption.IMPULSE_NOISE:
        out = _impulse_noise(img, kind.severity, rng)
    elif kind.variant is Corruption.MOTION_BLUR:
        out = _motion_blur(img, kind.severity)
    elif kind.variant is Corruption.SNOW:
        out = _snow(img, kind.severity, rng)
    elif kind.variant is Corruption.PIXELATION:
        out = _pixelate(img, kind.severity)
    else:
        raise ValueError(f"unknown corruption {kind.variant}")
    return np.clip(out, 0.0, 1.0)


def augment_double(ds: MultilabelDataset, seed: int) -> MultilabelDataset:
    """Double the dataset: originals first, then one corrupted copy each.

    Copy n+i is sample i under corruption i % 4 (round-robin over the
    four kinds, so the composition is seed-independent), with labels
    copied unchanged. Per-image noise is seeded from (seed, i).
    """
    n = len(ds)
    if n == 0:
        raise ValueError("cannot augment an empty dataset")
    kinds = default_corruptions()
    corrupted = np.empty_like(ds.images)
    for i in range(n):
        img_seed = np.random.SeedSequence(seed, spawn_key=(i,)).generate_state(1)[0]
        corrupted[i] = corrupt(ds.images[i], kinds[i % len(kinds)], int(img_seed))
    images = np.concatenate([ds.images, corrupted])
    labels = np.concatenate([ds.labels, ds.labels])
    return MultilabelDataset(images, labels, ds.label_names)


def maybe_hflip(img: np.ndarray, rng_draw: float) -> np.ndarray:
    """Flip left-right when the uniform draw falls below 0.5."""
    if rng_draw < 0.5:
        return img[:, ::-1, :].copy()
    return img
