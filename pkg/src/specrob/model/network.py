"""Built-in differentiable classifier: network graph, model handle, and
the two reference architectures.

A network is an ordered list of named stages, each a list of layers; the
output after each stage is a named tap, plus the pseudo-tap "input" for
the (front-end-processed) network input. The final stage must be named
"logits".
"""

import numpy as np

from .._rng import rng_for
from ..filters import FilterSpec
from .frontend import front_end_transform, front_end_vjp
from .layers import Conv2D, Dense, Flatten, MeanPool2, ReLU

__all__ = [
    "Network",
    "ModelHandle",
    "BuiltinModel",
    "build_network",
    "softmax",
    "cross_entropy_grad",
    "ARCHITECTURES",
]


def softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def cross_entropy_grad(logits, labels):
    """Mean cross-entropy loss over the batch and its gradient w.r.t. logits."""
    n = logits.shape[0]
    p = softmax(logits)
    eps = 1e-300
    loss = -float(np.mean(np.log(p[np.arange(n), labels] + eps)))
    grad = p
    grad[np.arange(n), labels] -= 1.0
    return loss, grad / n


class Network:
    def __init__(self, stages, input_shape, class_count):
        names = [name for name, _ in stages]
        if names[-1] != "logits":
            raise ValueError("the final stage must be named 'logits'")
        if len(set(names)) != len(names) or "input" in names:
            raise ValueError("stage names must be unique and not 'input'")
        self.stages = stages
        self.input_shape = tuple(input_shape)
        self.class_count = class_count

    @property
    def layer_names(self):
        return ["input"] + [name for name, _ in self.stages]

    def _layers(self):
        for _, layers in self.stages:
            yield from layers

    def parameters(self):
        """Yield (layer, param name, array) over all trainable parameters."""
        for layer in self._layers():
            for pname in layer.params:
                yield layer, pname, layer.params[pname]

    def forward(self, x, want=None):
        """Run the graph; returns (logits, {tap name: output}) for `want`."""
        want = set(want or ())
        unknown = want - set(self.layer_names)
        if unknown:
            raise ValueError(f"unknown layer(s): {sorted(unknown)}")
        taps = {}
        if "input" in want:
            taps["input"] = x
        out = x
        for name, layers in self.stages:
            for layer in layers:
                out, _ = layer.forward(out)
            if name in want:
                taps[name] = out
        return out, taps

    def forward_backward(self, x, labels, need_input_grad=True):
        """Mean cross-entropy loss, parameter grads (stored), input grad."""
        caches = []
        out = x
        for layer in self._layers():
            out, cache = layer.forward(out)
            caches.append((layer, cache))
        loss, grad = cross_entropy_grad(out, labels)
        for pos, (layer, cache) in enumerate(reversed(caches)):
            last = pos == len(caches) - 1
            if last and not need_input_grad and isinstance(layer, Conv2D):
                layer.backward(cache, grad, need_input_grad=False)
                grad = None
            else:
                grad = layer.backward(cache, grad)
        return loss, out, grad


def smallconv(input_shape, class_count, rng):
    """conv3x3(16)+ReLU -> meanpool -> conv3x3(32)+ReLU -> meanpool -> dense."""
    c, h, w = input_shape
    if h % 4 or w % 4:
        raise ValueError("smallconv needs H and W divisible by 4")
    stages = [
        ("conv1", [Conv2D(c, 16, 3, rng), ReLU()]),
        ("pool1", [MeanPool2()]),
        ("conv2", [Conv2D(16, 32, 3, rng), ReLU()]),
        ("pool2", [MeanPool2()]),
        ("logits", [Flatten(), Dense(32 * (h // 4) * (w // 4), class_count, rng)]),
    ]
    return Network(stages, input_shape, class_count)


def mlp(input_shape, class_count, rng):
    """Flatten -> dense(128)+ReLU -> dense(K)."""
    c, h, w = input_shape
    stages = [
        ("hidden", [Flatten(), Dense(c * h * w, 128, rng), ReLU()]),
        ("logits", [Dense(128, class_count, rng)]),
    ]
    return Network(stages, input_shape, class_count)


ARCHITECTURES = {"smallconv": smallconv, "mlp": mlp}


def build_network(arch, input_shape, class_count, seed):
    if arch not in ARCHITECTURES:
        raise ValueError(f"unknown architecture {arch!r}")
    return ARCHITECTURES[arch](input_shape, class_count, rng_for(seed, "init", arch))


class ModelHandle:
    """Classifier interface: logits plus optional layer taps and gradients.

    capabilities is a frozenset drawn from {"logits", "layer_taps",
    "gradients"}; layer_taps implies `layer_names` lists the valid taps.
    """

    capabilities: frozenset
    class_count: int
    input_shape: tuple
    layer_names: list
    model_id: str

    def forward(self, batch):
        raise NotImplementedError

    def forward_with_taps(self, batch, layers):
        raise NotImplementedError

    def grad_input(self, batch, labels):
        raise NotImplementedError("model does not expose gradients")

    def predict(self, batch):
        return np.argmax(self.forward(batch), axis=1)


def _check_finite(logits):
    if not np.all(np.isfinite(logits)):
        raise FloatingPointError("numerical failure: non-finite logits")
    return logits


class BuiltinModel(ModelHandle):
    """A Network plus an optional filter front end applied at inference."""

    capabilities = frozenset({"logits", "layer_taps", "gradients"})

    def __init__(self, network: Network, front_end: FilterSpec | None = None,
                 model_id: str = "builtin", train_log=None):
        self.network = network
        self.front_end = front_end
        self.model_id = model_id
        self.train_log = train_log or []

    @property
    def class_count(self):
        return self.network.class_count

    @property
    def input_shape(self):
        return self.network.input_shape

    @property
    def layer_names(self):
        return self.network.layer_names

    def _prepare(self, batch):
        batch = np.asarray(batch, dtype=np.float64)
        if batch.ndim != 4 or batch.shape[1:] != self.input_shape:
            raise ValueError(
                f"expected batch of shape (N, {', '.join(map(str, self.input_shape))})"
            )
        return front_end_transform(batch, self.front_end)

    def forward(self, batch):
        logits, _ = self.network.forward(self._prepare(batch))
        return _check_finite(logits)

    def forward_with_taps(self, batch, layers):
        logits, taps = self.network.forward(self._prepare(batch), want=layers)
        return _check_finite(logits), taps

    def grad_input(self, batch, labels):
        """Gradient of the mean cross-entropy w.r.t. the raw input batch."""
        batch = np.asarray(batch, dtype=np.float64)
        labels = np.asarray(labels)
        x = front_end_transform(batch, self.front_end)
        _, _, gx = self.network.forward_backward(x, labels)
        return front_end_vjp(batch, self.front_end, gx)

    def loss_and_param_grads(self, batch, labels):
        """Training-side pass: loss and per-layer parameter gradients."""
        x = front_end_transform(np.asarray(batch, dtype=np.float64), self.front_end)
        loss, logits, _ = self.network.forward_backward(x, labels, need_input_grad=False)
        return loss, logits
