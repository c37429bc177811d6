"""From-scratch float64 feed-forward layers with analytic gradients.

Everything runs in 64-bit so finite-difference checks can be tight.
Layers expose parameter shapes (with fan-in for initialization) and a
forward/backward pair; `Network` chains them, owns the flat parameter
layout, and computes the multilabel binary cross-entropy loss and its
exact gradient.

Convolutions use im2col: windows are gathered into a matrix so the
kernel application is one matmul, and the input gradient is scattered
back with one slice-add per kernel offset.
"""

from __future__ import annotations

import numpy as np

# (name, shape, fan_in); fan_in 0 marks a zero-initialized bias
ParamSpec = tuple[str, tuple[int, ...], int]


def sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def bce_loss_and_delta(logits: np.ndarray, targets: np.ndarray):
    """Mean binary cross-entropy over every (sample, label) cell.

    Returns (loss, dloss/dlogits). Uses the log1p(exp(-|z|)) form, which
    never overflows.
    """
    z = logits
    y = targets.astype(np.float64)
    per_cell = np.maximum(z, 0.0) - z * y + np.log1p(np.exp(-np.abs(z)))
    loss = float(per_cell.mean())
    delta = (sigmoid(z) - y) / z.size
    return loss, delta


class Dense:
    def __init__(self, name: str, in_dim: int, out_dim: int):
        self.name = name
        self.in_dim = in_dim
        self.out_dim = out_dim

    def param_specs(self) -> list[ParamSpec]:
        return [
            (f"{self.name}.W", (self.in_dim, self.out_dim), self.in_dim),
            (f"{self.name}.b", (self.out_dim,), 0),
        ]

    def forward(self, params, x):
        y = x @ params[f"{self.name}.W"] + params[f"{self.name}.b"]
        return y, x

    def backward(self, params, cache, dy):
        x = cache
        grads = {
            f"{self.name}.W": x.T @ dy,
            f"{self.name}.b": dy.sum(axis=0),
        }
        return grads, dy @ params[f"{self.name}.W"].T


class Conv:
    """2-D convolution over NHWC input, `valid` or `same` padding."""

    def __init__(self, name, in_shape, filters, ksize, padding="valid"):
        self.name = name
        h, w, c = in_shape
        self.ksize = ksize
        self.in_channels = c
        self.filters = filters
        if padding == "same":
            if ksize % 2 == 0:
                raise ValueError("same padding needs an odd kernel")
            self.pad = ksize // 2
            oh, ow = h, w
        elif padding == "valid":
            self.pad = 0
            oh, ow = h - ksize + 1, w - ksize + 1
        else:
            raise ValueError(f"unknown padding {padding!r}")
        if oh < 1 or ow < 1:
            raise ValueError(
                f"{name}: kernel {ksize} does not fit input {h}x{w}"
            )
        self.out_shape = (oh, ow, filters)

    def param_specs(self) -> list[ParamSpec]:
        k, c, f = self.ksize, self.in_channels, self.filters
        return [
            (f"{self.name}.W", (k, k, c, f), k * k * c),
            (f"{self.name}.b", (f,), 0),
        ]

    def _cols(self, x):
        k = self.ksize
        if self.pad:
            x = np.pad(x, ((0, 0), (self.pad,) * 2, (self.pad,) * 2, (0, 0)))
        win = np.lib.stride_tricks.sliding_window_view(x, (k, k), axis=(1, 2))
        # (N, OH, OW, C, k, k) -> (N, OH, OW, k, k, C)
        return np.ascontiguousarray(win.transpose(0, 1, 2, 4, 5, 3))

    def forward(self, params, x):
        k, f = self.ksize, self.filters
        cols = self._cols(x)
        n, oh, ow = cols.shape[:3]
        mat = cols.reshape(n * oh * ow, k * k * self.in_channels)
        wmat = params[f"{self.name}.W"].reshape(-1, f)
        out = (mat @ wmat + params[f"{self.name}.b"]).reshape(n, oh, ow, f)
        return out, (mat, x.shape)

    def backward(self, params, cache, dy):
        k, c, f = self.ksize, self.in_channels, self.filters
        mat, x_shape = cache
        n, h, w, _ = x_shape
        oh, ow = dy.shape[1:3]
        dmat = dy.reshape(-1, f)
        grads = {
            f"{self.name}.W": (mat.T @ dmat).reshape(k, k, c, f),
            f"{self.name}.b": dmat.sum(axis=0),
        }
        wmat = params[f"{self.name}.W"].reshape(-1, f)
        dcols = (dmat @ wmat.T).reshape(n, oh, ow, k, k, c)
        dxp = np.zeros((n, h + 2 * self.pad, w + 2 * self.pad, c))
        for i in range(k):
            for j in range(k):
                dxp[:, i : i + oh, j : j + ow, :] += dcols[:, :, :, i, j, :]
        if self.pad:
            dxp = dxp[:, self.pad : -self.pad, self.pad : -self.pad, :]
        return grads, dxp


class ReLU:
    def param_specs(self):
        return []

    def forward(self, params, x):
        mask = x > 0
        return x * mask, mask

    def backward(self, params, cache, dy):
        return {}, dy * cache


class MaxPool2:
    """2x2 max pooling, stride 2; ties route the gradient to the first max."""

    def __init__(self, in_shape):
        h, w, c = in_shape
        if h < 2 or w < 2:
            raise ValueError(f"cannot 2x2-pool a {h}x{w} map")
        self.in_shape = in_shape
        self.out_shape = (h // 2, w // 2, c)

    def param_specs(self):
        return []

    def forward(self, params, x):
        n = x.shape[0]
        h2, w2, c = self.out_shape
        xc = x[:, : 2 * h2, : 2 * w2, :]
        quads = (
            xc.reshape(n, h2, 2, w2, 2, c)
            .transpose(0, 1, 3, 5, 2, 4)
            .reshape(n, h2, w2, c, 4)
        )
        idx = quads.argmax(axis=-1)
        out = np.take_along_axis(quads, idx[..., None], axis=-1)[..., 0]
        return out, (idx, x.shape)

    def backward(self, params, cache, dy):
        idx, x_shape = cache
        n = x_shape[0]
        h2, w2, c = self.out_shape
        dq = np.zeros((n, h2, w2, c, 4))
        np.put_along_axis(dq, idx[..., None], dy[..., None], axis=-1)
        dxc = (
            dq.reshape(n, h2, w2, c, 2, 2)
            .transpose(0, 1, 4, 2, 5, 3)
            .reshape(n, 2 * h2, 2 * w2, c)
        )
        dx = np.zeros(x_shape)
        dx[:, : 2 * h2, : 2 * w2, :] = dxc
        return {}, dx


class Flatten:
    def __init__(self, in_shape):
        self.out_dim = int(np.prod(in_shape))

    def param_specs(self):
        return []

    def forward(self, params, x):
        return x.reshape(x.shape[0], -1), x.shape

    def backward(self, params, cache, dy):
        return {}, dy.reshape(cache)


class GlobalAvgPool:
    def __init__(self, in_shape):
        self.in_shape = in_shape
        self.out_dim = in_shape[2]

    def param_specs(self):
        return []

    def forward(self, params, x):
        return x.mean(axis=(1, 2)), x.shape

    def backward(self, params, cache, dy):
        n, h, w, c = cache
        dx = np.broadcast_to(dy[:, None, None, :] / (h * w), cache)
        return {}, dx


class ResidualBlock:
    """Two same-padded convolutions with an identity shortcut.

    y = relu(conv2(relu(conv1(x))) + x). The shortcut requires the
    channel count to be preserved, which the constructor enforces by
    construction (filters == input channels).
    """

    def __init__(self, name, in_shape, ksize=3):
        channels = in_shape[2]
        self.conv1 = Conv(f"{name}.conv1", in_shape, channels, ksize, padding="same")
        self.conv2 = Conv(f"{name}.conv2", in_shape, channels, ksize, padding="same")
        self.out_shape = in_shape

    def param_specs(self):
        return self.conv1.param_specs() + self.conv2.param_specs()

    def forward(self, params, x):
        h1, c1 = self.conv1.forward(params, x)
        a1 = h1 * (h1 > 0)
        h2, c2 = self.conv2.forward(params, a1)
        z = h2 + x
        out = z * (z > 0)
        return out, (c1, h1 > 0, c2, z > 0)

    def backward(self, params, cache, dy):
        c1, mask1, c2, maskz = cache
        dz = dy * maskz
        g2, da1 = self.conv2.backward(params, c2, dz)
        dh1 = da1 * mask1
        g1, dx_branch = self.conv1.backward(params, c1, dh1)
        grads = {**g1, **g2}
        return grads, dx_branch + dz


class Network:
    """A layer chain with a single flat parameter vector."""

    def __init__(self, layers):
        self.layers = layers
        self.layout: tuple[tuple[str, tuple[int, ...]], ...] = tuple(
            (name, shape) for layer in layers for name, shape, _ in layer.param_specs()
        )
        self.fan_in = {
            name: fan for layer in layers for name, _, fan in layer.param_specs()
        }
        self._slices = {}
        offset = 0
        for name, shape in self.layout:
            size = int(np.prod(shape))
            self._slices[name] = (slice(offset, offset + size), shape)
            offset += size
        self.n_params = offset

    def split(self, flat: np.ndarray) -> dict[str, np.ndarray]:
        """Name -> reshaped view into the flat vector (no copies)."""
        if flat.shape != (self.n_params,):
            raise ValueError(f"expected {self.n_params} parameters, got {flat.shape}")
        return {n: flat[s].reshape(shape) for n, (s, shape) in self._slices.items()}

    def join(self, named: dict[str, np.ndarray]) -> np.ndarray:
        flat = np.zeros(self.n_params)
        for name, (s, shape) in self._slices.items():
            if name in named:
                flat[s] = named[name].reshape(-1)
        return flat

    def init_flat(self, seed: int) -> np.ndarray:
        """Fan-in scaled uniform weights, bound sqrt(6 / fan_in); zero biases."""
        rng = np.random.default_rng(seed)
        flat = np.zeros(self.n_params)
        for name, (s, shape) in self._slices.items():
            fan = self.fan_in[name]
            if fan > 0:
                bound = np.sqrt(6.0 / fan)
                flat[s] = rng.uniform(-bound, bound, size=int(np.prod(shape)))
        return flat

    def forward_logits(self, flat, x, keep_caches=False):
        params = self.split(flat)
        caches = []
        out = x
        for layer in self.layers:
            out, cache = layer.forward(params, out)
            if keep_caches:
                caches.append(cache)
        return (out, params, caches) if keep_caches else out

    def loss_and_grad(self, flat, x, y, prox_anchor=None, prox_mu=0.0):
        """BCE loss (plus optional proximal penalty) and its flat gradient."""
        logits, params, caches = self.forward_logits(flat, x, keep_caches=True)
        loss, delta = bce_loss_and_delta(logits, y)
        grads: dict[str, np.ndarray] = {}
        dout = delta
        for layer, cache in zip(reversed(self.layers), reversed(caches)):
            layer_grads, dout = layer.backward(params, cache, dout)
            grads.update(layer_grads)
        grad = self.join(grads)
        if prox_anchor is not None and prox_mu != 0.0:
            diff = flat - prox_anchor
            loss += 0.5 * prox_mu * float(diff @ diff)
            grad += prox_mu * diff
        if not np.isfinite(loss) or not np.isfinite(grad).all():
            raise FloatingPointError("non-finite loss or gradient encountered")
        return loss, grad
