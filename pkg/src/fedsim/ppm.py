"""Binary P6 PPM codec and the dataset directory format.

A dataset directory holds one `labels.csv` manifest and one P6 image per
row. The manifest's first line declares the vocabulary:

    #labels:name1;name2;...
    img_000.ppm,name1;name2
    img_001.ppm,

An empty label field is legal and means "no labels". Pixels are stored
as bytes and scaled to [0, 1] on load; writing quantizes to the 8-bit
grid, which is the documented lossy step.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from .dataset import MultilabelDataset

MANIFEST_NAME = "labels.csv"
_LABEL_HEADER = "#labels:"


class DatasetFormatError(ValueError):
    """Raised for malformed manifests or image files."""


def read_ppm(path) -> np.ndarray:
    """Read a binary (P6) PPM into a float64 (H, W, 3) array in [0, 1]."""
    data = Path(path).read_bytes()
    fields: list[bytes] = []
    pos = 0
    # header = magic, width, height, maxval; '#' comments run to end of line
    while len(fields) < 4:
        if pos >= len(data):
            raise DatasetFormatError(f"{path}: truncated PPM header")
        c = data[pos : pos + 1]
        if c.isspace():
            pos += 1
        elif c == b"#":
            pos = data.find(b"\n", pos)
            if pos < 0:
                raise DatasetFormatError(f"{path}: unterminated comment")
        else:
            end = pos
            while end < len(data) and not data[end : end + 1].isspace():
                end += 1
            fields.append(data[pos:end])
            pos = end
    if fields[0] != b"P6":
        raise DatasetFormatError(f"{path}: not a binary P6 PPM (magic {fields[0]!r})")
    try:
        width, height, maxval = (int(f) for f in fields[1:])
    except ValueError as e:
        raise DatasetFormatError(f"{path}: non-numeric PPM header field") from e
    if maxval != 255:
        raise DatasetFormatError(f"{path}: only maxval 255 supported, got {maxval}")
    pos += 1  # single whitespace byte after maxval
    raw = data[pos : pos + width * height * 3]
    if len(raw) != width * height * 3:
        raise DatasetFormatError(f"{path}: pixel data shorter than header promises")
    pixels = np.frombuffer(raw, dtype=np.uint8).reshape(height, width, 3)
    return pixels.astype(np.float64) / 255.0


def write_ppm(path, image: np.ndarray) -> None:
    """Write a float64 (H, W, 3) image in [0, 1] as binary P6, quantized to bytes."""
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"P6 requires (H, W, 3), got shape {img.shape}")
    h, w, _ = img.shape
    quantized = np.clip(np.floor(img * 255.0 + 0.5), 0, 255).astype(np.uint8)
    with open(path, "wb") as f:
        f.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        f.write(quantized.tobytes())


def load_dataset(dir_path) -> MultilabelDataset:
    """Load a dataset directory (manifest + P6 images) in manifest order."""
    root = Path(dir_path)
    manifest = root / MANIFEST_NAME
    if not manifest.is_file():
        raise FileNotFoundError(f"missing manifest {manifest}")
    lines = manifest.read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].startswith(_LABEL_HEADER):
        raise DatasetFormatError(
            f"{manifest}: first line must declare the vocabulary as '{_LABEL_HEADER}a;b;...'"
        )
    label_names = [s for s in lines[0][len(_LABEL_HEADER) :].split(";") if s]
    index = {name: i for i, name in enumerate(label_names)}

    images, rows = [], []
    shape = None
    for line in lines[1:]:
        if not line.strip():
            continue
        filename, _, label_field = line.partition(",")
        img = read_ppm(root / filename)
        if shape is None:
            shape = img.shape
        elif img.shape != shape:
            raise DatasetFormatError(
                f"{filename}: dimensions {img.shape} differ from first image {shape}"
            )
        bits = np.zeros(len(label_names), dtype=np.uint8)
        for name in label_field.split(";"):
            if not name:
                continue
            if name not in index:
                raise DatasetFormatError(f"{filename}: unknown label {name!r}")
            bits[index[name]] = 1
        images.append(img)
        rows.append(bits)
    if not images:
        raise DatasetFormatError(f"{manifest}: no image rows")
    return MultilabelDataset(np.stack(images), np.stack(rows), tuple(label_names))


def save_dataset(ds: MultilabelDataset, dir_path) -> None:
    """Write a dataset as a directory of P6 images plus labels.csv."""
    if ds.shape[2] != 3:
        raise ValueError("only 3-channel datasets can be written as P6")
    root = Path(dir_path)
    os.makedirs(root, exist_ok=True)
    width = len(str(max(len(ds) - 1, 0)))
    lines = [_LABEL_HEADER + ";".join(ds.label_names)]
    for i in range(len(ds)):
        filename = f"img_{i:0{width}d}.ppm"
        write_ppm(root / filename, ds.images[i])
        names = [ds.label_names[l] for l in np.flatnonzero(ds.labels[i])]
        lines.append(f"{filename},{';'.join(names)}")
    (root / MANIFEST_NAME).write_text("\n".join(lines) + "\n", encoding="utf-8")
