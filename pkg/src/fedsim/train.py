"""Local mini-batch SGD with momentum, the per-client training step.

One call trains one client shard for E epochs. The velocity buffer is
reset to zero at the start of every call; the update rule is

    v <- momentum * v - lr * g
    w <- w + v

Each epoch reshuffles the shard and draws one uniform per image for the
random horizontal flip, all from a single seeded stream, so results are
a pure function of (weights, shard, hyperparameters, seed).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .models import LearnerSpec, ModelWeights, ProximalConfig, build_network


@dataclass
class OptimizerState:
    learning_rate: float = 0.001
    momentum: float = 0.9
    velocity: np.ndarray | None = None

    def __post_init__(self):
        if self.learning_rate < 0 or not 0.0 <= self.momentum < 1.0:
            raise ValueError("need learning_rate >= 0 and momentum in [0, 1)")


def local_train(
    spec: LearnerSpec,
    w_in: ModelWeights,
    images: np.ndarray,
    labels: np.ndarray,
    epochs: int,
    batch_size: int,
    opt: OptimizerState | None = None,
    prox: ProximalConfig | None = None,
    seed: int = 0,
) -> tuple[ModelWeights, int]:
    """Run E epochs of seeded mini-batch SGD; returns (weights, batches run).

    The final batch of an epoch may be smaller than batch_size. A flip
    draw below 0.5 mirrors the image left-right for that visit only.
    """
    n = len(images)
    if n == 0:
        raise ValueError("client shard is empty")
    if epochs < 1 or batch_size < 1:
        raise ValueError("epochs and batch_size must be >= 1")
    opt = opt or OptimizerState()
    net = build_network(spec)

    anchor, mu = None, 0.0
    if prox is not None and prox.mu != 0.0:
        if prox.anchor.n_params != w_in.n_params:
            raise ValueError("proximal anchor length does not match weights")
        anchor, mu = prox.anchor.values, prox.mu

    rng = np.random.default_rng(seed)
    w = w_in.values.copy()
    v = np.zeros_like(w)
    batches = 0
    for _ in range(epochs):
        order = rng.permutation(n)
        flip_draws = rng.random(n)
        for start in range(0, n, batch_size):
            sel = order[start : start + batch_size]
            flips = flip_draws[start : start + batch_size] < 0.5
            batch = np.where(
                flips[:, None, None, None], images[sel][:, :, ::-1, :], images[sel]
            )
            _, grad = net.loss_and_grad(w, batch, labels[sel], anchor, mu)
            v = opt.momentum * v - opt.learning_rate * grad
            w = w + v
            batches += 1
    return ModelWeights(w, w_in.layout), batches
