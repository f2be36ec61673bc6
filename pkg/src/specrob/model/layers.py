"""Differentiable layers with explicit forward/backward passes.

Each layer's forward returns (output, cache); backward takes (cache, grad)
and returns the input gradient, stashing parameter gradients in
`layer.grads`. Everything is float64.
"""

import numpy as np

from .. import _kernels

__all__ = ["Conv2D", "ReLU", "MeanPool2", "Flatten", "Dense"]


class Layer:
    params: dict
    grads: dict

    def __init__(self):
        self.params = {}
        self.grads = {}

    def forward(self, x):
        raise NotImplementedError

    def backward(self, cache, gy):
        raise NotImplementedError


def _fan_in_uniform(rng, shape, fan_in):
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


class Conv2D(Layer):
    """Stride-1, same-padded convolution with an odd square kernel."""

    def __init__(self, c_in, c_out, ksize=3, rng=None):
        super().__init__()
        if ksize % 2 != 1:
            raise ValueError("kernel size must be odd")
        self.c_in, self.c_out, self.ksize = c_in, c_out, ksize
        rng = rng or np.random.default_rng(0)
        fan_in = c_in * ksize * ksize
        self.params["w"] = _fan_in_uniform(rng, (c_out, c_in, ksize, ksize), fan_in)
        self.params["b"] = _fan_in_uniform(rng, (c_out,), fan_in)

    def forward(self, x):
        return _kernels.conv2d_forward(x, self.params["w"], self.params["b"]), x

    def backward(self, cache, gy, need_input_grad=True):
        x = cache
        gy = np.ascontiguousarray(gy)
        gw, gb = _kernels.conv2d_backward_weights(x, gy, self.ksize, self.ksize)
        self.grads = {"w": gw, "b": gb}
        if not need_input_grad:
            return None
        return _kernels.conv2d_backward_input(gy, self.params["w"])


class ReLU(Layer):
    def forward(self, x):
        return np.maximum(x, 0.0), x

    def backward(self, cache, gy):
        return gy * (cache > 0.0)


class MeanPool2(Layer):
    """2x2 mean pooling; spatial dims must be even."""

    def forward(self, x):
        n, c, h, w = x.shape
        if h % 2 or w % 2:
            raise ValueError("MeanPool2 requires even spatial dimensions")
        y = x.reshape(n, c, h // 2, 2, w // 2, 2).mean(axis=(3, 5))
        return y, x.shape

    def backward(self, cache, gy):
        n, c, h, w = cache
        up = np.repeat(np.repeat(gy, 2, axis=2), 2, axis=3)
        return up * 0.25


class Flatten(Layer):
    def forward(self, x):
        return x.reshape(x.shape[0], -1), x.shape

    def backward(self, cache, gy):
        return gy.reshape(cache)


class Dense(Layer):
    def __init__(self, n_in, n_out, rng=None):
        super().__init__()
        rng = rng or np.random.default_rng(0)
        self.params["w"] = _fan_in_uniform(rng, (n_out, n_in), n_in)
        self.params["b"] = _fan_in_uniform(rng, (n_out,), n_in)

    def forward(self, x):
        return x @ self.params["w"].T + self.params["b"], x

    def backward(self, cache, gy):
        x = cache
        self.grads = {"w": gy.T @ x, "b": gy.sum(axis=0)}
        return gy @ self.params["w"]
