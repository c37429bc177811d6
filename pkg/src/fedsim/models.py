"""Learner zoo: flat weight vectors over four small architectures.

Architectures:
  linear         one dense layer on flattened pixels
  mlp            dense/relu stack with configurable hidden widths
  lenet          conv(6, 5x5) pool conv(16, 5x5) pool fc(120) fc(L),
                 5x5 kernels in every convolution
  tiny_residual  conv(8, 3x3) stem, two identity-shortcut residual
                 blocks, global average pool, fc(L)

Outputs are per-label probabilities through an elementwise logistic.
"""

from __future__ import annotations

import functools
import json
import struct
from dataclasses import dataclass

import numpy as np

from . import nn

ARCHITECTURES = ("linear", "mlp", "lenet", "tiny_residual")

_MAGIC = b"FSW1"


@dataclass(frozen=True)
class LearnerSpec:
    architecture: str
    input_shape: tuple[int, int, int]
    n_labels: int
    hidden: tuple[int, ...] = (64,)

    def __post_init__(self):
        if self.architecture not in ARCHITECTURES:
            raise ValueError(
                f"unknown architecture {self.architecture!r}; choose from {ARCHITECTURES}"
            )
        object.__setattr__(self, "input_shape", tuple(int(d) for d in self.input_shape))
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        if len(self.input_shape) != 3 or min(self.input_shape) < 1:
            raise ValueError(f"bad input shape {self.input_shape}")
        if self.n_labels < 1:
            raise ValueError("n_labels must be >= 1")


@dataclass(frozen=True)
class ModelWeights:
    """Flat float64 parameter vector plus its (name, shape) layout."""

    values: np.ndarray
    layout: tuple[tuple[str, tuple[int, ...]], ...]

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64).reshape(-1)
        object.__setattr__(self, "values", values)
        layout = tuple((name, tuple(shape)) for name, shape in self.layout)
        object.__setattr__(self, "layout", layout)
        expected = sum(int(np.prod(shape)) for _, shape in layout)
        if len(values) != expected:
            raise ValueError(
                f"{len(values)} values but layout declares {expected}"
            )
        if not np.isfinite(values).all():
            raise ValueError("weights contain non-finite values")

    @property
    def n_params(self) -> int:
        return len(self.values)


@functools.lru_cache(maxsize=32)
def build_network(spec: LearnerSpec) -> nn.Network:
    h, w, c = spec.input_shape
    layers: list = []
    if spec.architecture == "linear":
        flat = nn.Flatten(spec.input_shape)
        layers = [flat, nn.Dense("fc", flat.out_dim, spec.n_labels)]
    elif spec.architecture == "mlp":
        flat = nn.Flatten(spec.input_shape)
        layers = [flat]
        width = flat.out_dim
        for i, hidden in enumerate(spec.hidden):
            layers += [nn.Dense(f"fc{i + 1}", width, hidden), nn.ReLU()]
            width = hidden
        layers.append(nn.Dense("out", width, spec.n_labels))
    elif spec.architecture == "lenet":
        conv1 = nn.Conv("conv1", spec.input_shape, 6, 5)
        pool1 = nn.MaxPool2(conv1.out_shape)
        conv2 = nn.Conv("conv2", pool1.out_shape, 16, 5)
        pool2 = nn.MaxPool2(conv2.out_shape)
        flat = nn.Flatten(pool2.out_shape)
        layers = [
            conv1, nn.ReLU(), pool1,
            conv2, nn.ReLU(), pool2,
            flat,
            nn.Dense("fc1", flat.out_dim, 120), nn.ReLU(),
            nn.Dense("fc2", 120, spec.n_labels),
        ]
    elif spec.architecture == "tiny_residual":
        stem = nn.Conv("stem", spec.input_shape, 8, 3, padding="same")
        block1 = nn.ResidualBlock("block1", stem.out_shape)
        block2 = nn.ResidualBlock("block2", block1.out_shape)
        gap = nn.GlobalAvgPool(block2.out_shape)
        layers = [stem, nn.ReLU(), block1, block2, gap, nn.Dense("fc", gap.out_dim, spec.n_labels)]
    return nn.Network(layers)


def init_weights(spec: LearnerSpec, seed: int) -> ModelWeights:
    """Seed-deterministic fan-in uniform initialization, zero biases."""
    net = build_network(spec)
    return ModelWeights(net.init_flat(seed), net.layout)


def forward(spec: LearnerSpec, w: ModelWeights, batch: np.ndarray) -> np.ndarray:
    """Per-sample label probabilities, shape (N, L), values in (0, 1)."""
    net = build_network(spec)
    batch = np.asarray(batch, dtype=np.float64)
    if batch.shape[1:] != spec.input_shape:
        raise ValueError(
            f"batch shape {batch.shape[1:]} does not match spec {spec.input_shape}"
        )
    return nn.sigmoid(net.forward_logits(w.values, batch))


@dataclass(frozen=True)
class ProximalConfig:
    """Penalty (mu/2) * ||w - anchor||^2 added to the local objective."""

    mu: float
    anchor: ModelWeights

    def __post_init__(self):
        if self.mu < 0:
            raise ValueError("mu must be >= 0")


def loss_and_grad(
    spec: LearnerSpec,
    w: ModelWeights,
    batch: np.ndarray,
    labels: np.ndarray,
    prox: ProximalConfig | None = None,
):
    """Mean multilabel BCE (plus proximal term) and its exact gradient.

    With mu = 0 or no prox config the result is identical, bit for bit,
    to the plain loss.
    """
    net = build_network(spec)
    batch = np.asarray(batch, dtype=np.float64)
    labels = np.asarray(labels)
    if batch.shape[0] != labels.shape[0] or labels.shape[1] != spec.n_labels:
        raise ValueError("batch / label shape mismatch")
    anchor = None
    mu = 0.0
    if prox is not None and prox.mu != 0.0:
        if prox.anchor.n_params != w.n_params:
            raise ValueError("proximal anchor length does not match weights")
        anchor = prox.anchor.values
        mu = prox.mu
    loss, grad = net.loss_and_grad(w.values, batch, labels, anchor, mu)
    return loss, grad


def serialize_weights(w: ModelWeights) -> bytes:
    """Layout header (JSON) + raw little-endian float64 values."""
    header = json.dumps([[name, list(shape)] for name, shape in w.layout]).encode()
    return _MAGIC + struct.pack("<I", len(header)) + header + w.values.astype("<f8").tobytes()


def deserialize_weights(blob: bytes) -> ModelWeights:
    if blob[:4] != _MAGIC:
        raise ValueError("not a serialized weight blob")
    (hlen,) = struct.unpack("<I", blob[4:8])
    layout = tuple(
        (name, tuple(shape)) for name, shape in json.loads(blob[8 : 8 + hlen])
    )
    values = np.frombuffer(blob[8 + hlen :], dtype="<f8").astype(np.float64)
    return ModelWeights(values, layout)


def model_nbytes(spec: LearnerSpec) -> int:
    """Serialized size of one weight transfer for this learner."""
    return len(serialize_weights(init_weights(spec, 0)))
