"""SGD training loop with composable augmentation stages.

Augmentation stages run in order on each raw batch (before the filter
front end, which is part of the model function itself). Every stage draws
from a stream keyed by (seed, stage index, epoch, batch), so runs replay
bitwise for a fixed config and adding a no-op stage leaves other streams
untouched.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .._rng import rng_for
from ..augment import (
    BandNoiseConfig,
    GaussianAugConfig,
    SpectralTemplate,
    band_limited_noise,
    gaussian_augment,
    sample_matched_noise,
)
from ..corruptions import CorruptionSpec, apply_corruption
from ..fft import clip01
from ..filters import FilterSpec
from .attack import PgdConfig, pgd_attack
from .network import BuiltinModel, build_network

__all__ = [
    "TrainConfig",
    "FlipCrop",
    "GaussianStage",
    "BandNoiseStage",
    "MatchedNoiseStage",
    "CorruptionSetStage",
    "AdversarialStage",
    "TrainingDivergedError",
    "train",
    "adversarial_train",
]


class TrainingDivergedError(RuntimeError):
    pass


@dataclass(frozen=True)
class FlipCrop:
    """Horizontal flip (p=0.5) plus zero-pad-and-random-crop."""

    pad: int = 4


@dataclass(frozen=True)
class GaussianStage:
    sigma: float
    per_image: bool = False


@dataclass(frozen=True)
class BandNoiseStage:
    filter: FilterSpec
    target_norm: float


@dataclass(frozen=True)
class MatchedNoiseStage:
    template: SpectralTemplate


@dataclass(frozen=True)
class CorruptionSetStage:
    """Per image, apply one corruption drawn uniformly from names x severities."""

    names: tuple
    severities: tuple = (1, 2, 3, 4, 5)


@dataclass(frozen=True)
class AdversarialStage:
    pgd: PgdConfig


@dataclass(frozen=True)
class TrainConfig:
    epochs: int
    batch_size: int
    learning_rate: float = 0.02
    lr_decay: float = 0.1
    lr_decay_epochs: tuple = ()
    momentum: float = 0.9
    weight_decay: float = 0.0
    grad_clip: float = 5.0  # global-norm clip; 0 disables
    seed: int = 0
    augmentation: tuple = ()
    front_end: FilterSpec | None = None

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be positive")
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")


def _flip_crop(x, pad, rng):
    n, c, h, w = x.shape
    out = np.empty_like(x)
    flips = rng.random(n) < 0.5
    dx = rng.integers(0, 2 * pad + 1, size=n)
    dy = rng.integers(0, 2 * pad + 1, size=n)
    padded = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    for k in range(n):
        img = padded[k, :, dy[k] : dy[k] + h, dx[k] : dx[k] + w]
        out[k] = img[:, :, ::-1] if flips[k] else img
    return out


def _apply_stage(stage, x, labels, model, rng):
    if isinstance(stage, FlipCrop):
        return _flip_crop(x, stage.pad, rng)
    if isinstance(stage, GaussianStage):
        cfg = GaussianAugConfig(stage.sigma, per_image=stage.per_image)
        return gaussian_augment(x, cfg, rng=rng)
    if isinstance(stage, BandNoiseStage):
        cfg = BandNoiseConfig(stage.filter, stage.target_norm)
        noise = np.stack([band_limited_noise(x.shape[1:], cfg, rng=rng) for _ in x])
        return clip01(x + noise)
    if isinstance(stage, MatchedNoiseStage):
        if not np.any(stage.template.grid):
            return x
        noise = np.stack(
            [sample_matched_noise(stage.template, x.shape[1], rng) for _ in x]
        )
        return clip01(x + noise)
    if isinstance(stage, CorruptionSetStage):
        out = np.empty_like(x)
        for k in range(x.shape[0]):
            name = stage.names[rng.integers(len(stage.names))]
            severity = stage.severities[rng.integers(len(stage.severities))]
            spec = CorruptionSpec(name, int(severity), seed=int(rng.integers(1 << 62)))
            out[k] = apply_corruption(x[k], spec)
        return out
    if isinstance(stage, AdversarialStage):
        x_adv, _ = pgd_attack(model, x, labels, stage.pgd, rng=rng)
        return x_adv
    raise ValueError(f"unknown augmentation stage {stage!r}")


def _accuracy(model, images, labels, batch_size=512):
    hits = 0
    for start in range(0, images.shape[0], batch_size):
        pred = model.predict(images[start : start + batch_size])
        hits += int(np.count_nonzero(pred == labels[start : start + batch_size]))
    return hits / images.shape[0]


def train(dataset, cfg: TrainConfig, arch: str = "smallconv", eval_dataset=None):
    """Train a built-in model; deterministic given (dataset, cfg, arch).

    Returns a BuiltinModel whose train_log holds one row per epoch with
    the learning rate, mean loss, train accuracy, and (when eval_dataset
    is given) test accuracy.
    """
    images = np.asarray(dataset.images, dtype=np.float64)
    labels = np.asarray(dataset.labels)
    n = images.shape[0]
    if n == 0:
        raise ValueError("empty training dataset")
    class_count = int(labels.max()) + 1

    network = build_network(arch, images.shape[1:], class_count, cfg.seed)
    model = BuiltinModel(
        network, front_end=cfg.front_end, model_id=f"{arch}-seed{cfg.seed}"
    )
    velocity = [np.zeros_like(p) for _, _, p in network.parameters()]

    for epoch in range(cfg.epochs):
        decays = sum(1 for d in cfg.lr_decay_epochs if d <= epoch)
        lr = cfg.learning_rate * cfg.lr_decay**decays
        order = rng_for(cfg.seed, "shuffle", epoch).permutation(n)
        losses = []
        for bstart in range(0, n, cfg.batch_size):
            bidx = order[bstart : bstart + cfg.batch_size]
            x, y = images[bidx], labels[bidx]
            for si, stage in enumerate(cfg.augmentation):
                rng = rng_for(cfg.seed, "augment", si, epoch, bstart)
                x = _apply_stage(stage, x, y, model, rng)
            loss, _ = model.loss_and_param_grads(x, y)
            if not np.isfinite(loss):
                raise TrainingDivergedError(
                    f"loss became non-finite at epoch {epoch}, batch {bstart} (lr={lr})"
                )
            losses.append(loss)
            scale = 1.0
            if cfg.grad_clip > 0:
                gnorm = np.sqrt(
                    sum(
                        float(np.sum(layer.grads[pname] ** 2))
                        for layer, pname, _ in network.parameters()
                    )
                )
                if gnorm > cfg.grad_clip:
                    scale = cfg.grad_clip / gnorm
            for k, (layer, pname, p) in enumerate(network.parameters()):
                g = layer.grads[pname] * scale
                if cfg.weight_decay:
                    g = g + cfg.weight_decay * p
                velocity[k] = cfg.momentum * velocity[k] - lr * g
                p += velocity[k]
        row = {
            "epoch": epoch,
            "lr": lr,
            "loss": float(np.mean(losses)),
            "train_accuracy": _accuracy(model, images, labels),
        }
        if eval_dataset is not None:
            row["test_accuracy"] = _accuracy(
                model, np.asarray(eval_dataset.images, dtype=np.float64),
                np.asarray(eval_dataset.labels),
            )
        model.train_log.append(row)
    return model


def adversarial_train(dataset, cfg: TrainConfig, pgd: PgdConfig,
                      arch: str = "smallconv", eval_dataset=None):
    """Training where each batch is replaced by PGD examples before the step."""
    adv_cfg = replace(cfg, augmentation=tuple(cfg.augmentation) + (AdversarialStage(pgd),))
    return train(dataset, adv_cfg, arch=arch, eval_dataset=eval_dataset)
