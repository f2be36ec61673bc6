"""Dataset container, CIFAR-10 binary ingestion, directory serialization,
and a desk-scale synthetic dataset generator.

The generator produces natural-image-like data (1/f^2 background spectrum)
with two complementary class cues: a noisy low-frequency layout and a
crisp, low-amplitude high-frequency texture. Cue statistics are symmetric
under horizontal flips and random phases make them translation tolerant,
so standard flip/crop augmentation is compatible.
"""

import os
from dataclasses import dataclass

import numpy as np

from .._rng import rng_for
from ..fft import clip01
from .npyio import load_tensor, save_tensor

__all__ = [
    "Dataset",
    "load_cifar10_binary",
    "save_cifar10_binary",
    "save_dataset",
    "load_dataset",
    "make_synthetic_dataset",
]

_CIFAR_RECORD = 3073  # 1 label byte + 3 x 1024 channel-plane bytes


@dataclass
class Dataset:
    images: np.ndarray  # (N, C, H, W) float64 in [0, 1]
    labels: np.ndarray  # (N,) integer class ids
    split: str = ""
    provenance: str = ""

    def __post_init__(self):
        self.images = np.asarray(self.images, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.images.ndim != 4:
            raise ValueError("images must be (N, C, H, W)")
        if self.labels.shape != (self.images.shape[0],):
            raise ValueError("labels must be one integer per image")

    def __len__(self):
        return self.images.shape[0]

    @property
    def class_count(self) -> int:
        return int(self.labels.max()) + 1 if len(self) else 0

    def subset(self, count: int) -> "Dataset":
        return Dataset(
            self.images[:count], self.labels[:count], self.split, self.provenance
        )


def load_cifar10_binary(path) -> Dataset:
    """Parse CIFAR-10 binary records: label byte + R,G,B planes of 1024 bytes."""
    raw = np.fromfile(path, dtype=np.uint8)
    if raw.size == 0 or raw.size % _CIFAR_RECORD:
        raise ValueError(
            f"file size {raw.size} is not a positive multiple of {_CIFAR_RECORD}"
        )
    records = raw.reshape(-1, _CIFAR_RECORD)
    labels = records[:, 0].astype(np.int64)
    if labels.max() > 9:
        raise ValueError(f"label {labels.max()} out of range for CIFAR-10")
    images = records[:, 1:].reshape(-1, 3, 32, 32).astype(np.float64) / 255.0
    return Dataset(images, labels, provenance=f"cifar10-binary:{path}")


def save_cifar10_binary(path, dataset: Dataset) -> None:
    images = dataset.images
    if images.shape[1:] != (3, 32, 32):
        raise ValueError("CIFAR-10 binary requires (3, 32, 32) images")
    if dataset.labels.min() < 0 or dataset.labels.max() > 9:
        raise ValueError("labels out of range for CIFAR-10")
    records = np.empty((len(dataset), _CIFAR_RECORD), dtype=np.uint8)
    records[:, 0] = dataset.labels
    records[:, 1:] = np.round(images * 255.0).reshape(len(dataset), -1)
    records.tofile(path)


def save_dataset(directory, dataset: Dataset) -> None:
    """Write images.npy (<f4) and labels.npy (|u1) into a directory."""
    os.makedirs(directory, exist_ok=True)
    save_tensor(os.path.join(directory, "images.npy"),
                dataset.images.astype("<f4"))
    save_tensor(os.path.join(directory, "labels.npy"),
                dataset.labels.astype("u1"))


def load_dataset(path, split: str = "") -> Dataset:
    """Load a CIFAR .bin file or a directory holding images.npy/labels.npy."""
    if os.path.isdir(path):
        images = load_tensor(os.path.join(path, "images.npy")).astype(np.float64)
        labels = load_tensor(os.path.join(path, "labels.npy")).astype(np.int64)
        return Dataset(images, labels, split=split, provenance=f"npy-dir:{path}")
    ds = load_cifar10_binary(path)
    ds.split = split
    return ds


# --- synthetic data -------------------------------------------------------

_PROTO_STD = 0.17  # smooth class-prototype field strength
_DELTA_STD = 0.0  # within-pair prototype distinguisher strength
_PROTO_RADIUS = 4  # prototypes/deltas live below this spectral radius
_PROTO_JITTER = 0.15  # relative per-image prototype amplitude noise
_MAX_SHIFT = 4  # per-image circular prototype shift range
_TEX_RADIUS = (6, 14)  # high-frequency annulus carrying the texture waves
_TEX_WAVES = 3  # waves per class
_TEX_AMPLITUDE = 0.15  # per-wave amplitude (strong, trainable texture)
_TEX_JITTER = 0.15  # relative per-image texture amplitude noise
_BG_STD = 0.10  # shared 1/f^2 background field strength
_BG2_STD = 0.03  # per-channel independent background
_PIXEL_NOISE = 0.012
_BRIGHTNESS_JITTER = 0.04


def _spectral_field(h, w, rng, exponent=2.0, radius=None):
    """Zero-mean, unit-std random field with |F| ~ 1/f^exponent.

    With `radius` set, support is restricted to bins below that radius
    (low-pass random field).
    """
    fi = np.minimum(np.arange(h), h - np.arange(h))[:, None]
    fj = np.minimum(np.arange(w), w - np.arange(w))[None, :]
    r = np.hypot(fi, fj)
    envelope = 1.0 / np.maximum(r, 1.0) ** exponent
    envelope[0, 0] = 0.0
    if radius is not None:
        envelope[r > radius] = 0.0
    noise = rng.standard_normal((h, w)) + 1j * rng.standard_normal((h, w))
    field = np.fft.ifft2(envelope * np.fft.fft2(noise)).real
    return field / max(field.std(), 1e-12)


def _class_structure(classes, size, channels, seed):
    """Fixed per-class fields.

    Classes 2k and 2k+1 share a smooth base prototype and differ by a
    weaker low-frequency delta, leaving the smooth layout partially
    ambiguous. Each class additionally owns a spectral texture code: a
    fixed-phase sum of faint waves on a disjoint set of high-frequency
    bins. The code is the most reliable cue on clean data (many coherent
    bins), but each bin's magnitude sits below the per-bin level of
    moderate additive pixel noise, so noise augmentation drowns it.
    """
    rng = rng_for(seed, "synth_classes")
    h = w = size
    protos = np.empty((classes, h, w))
    bases = {}
    for c in range(classes):
        pair = c // 2
        if pair not in bases:
            bases[pair] = _PROTO_STD * _spectral_field(h, w, rng, radius=_PROTO_RADIUS)
        delta = _DELTA_STD * _spectral_field(h, w, rng, radius=_PROTO_RADIUS)
        protos[c] = bases[pair] + delta
    proto_color = 0.6 + 0.8 * rng.random((classes, channels))
    tex_gain = 0.7 + 0.6 * rng.random((classes, channels))

    candidates = [
        (fi, fj)
        for fi in range(0, _TEX_RADIUS[1] + 1)
        for fj in range(-_TEX_RADIUS[1], _TEX_RADIUS[1] + 1)
        if _TEX_RADIUS[0] <= np.hypot(fi, fj) <= _TEX_RADIUS[1]
        and (fi > 0 or fj > 0)
    ]
    picks = rng.choice(len(candidates), size=(classes, _TEX_WAVES), replace=False)
    tex_freqs = [[candidates[p] for p in row] for row in picks]
    return protos, proto_color, tex_freqs, tex_gain


def make_synthetic_dataset(
    n: int,
    classes: int = 10,
    size: int = 32,
    channels: int = 3,
    seed: int = 0,
    split: str = "train",
) -> Dataset:
    """Balanced labeled images; class structure depends only on
    (seed, classes, size, channels) so different splits with the same seed
    share the same classes. Per-image randomness (shifts, flips, phases,
    backgrounds) is keyed by (seed, split, index)."""
    if n < 1:
        raise ValueError("need at least one image")
    if classes % 2:
        raise ValueError("class count must be even (classes come in pairs)")
    protos, proto_color, tex_freqs, tex_gain = _class_structure(
        classes, size, channels, seed
    )
    m_grid = np.arange(size)[:, None]
    n_grid = np.arange(size)[None, :]
    h = w = size
    images = np.empty((n, channels, h, w))
    labels = np.arange(n) % classes
    for k in range(n):
        c = labels[k]
        rng = rng_for(seed, "synth_image", split, k)
        base = 0.5 + _BRIGHTNESS_JITTER * rng.standard_normal()
        scale = max(0.0, 1.0 + _PROTO_JITTER * rng.standard_normal())
        proto = np.roll(
            protos[c],
            (rng.integers(-_MAX_SHIFT, _MAX_SHIFT + 1),
             rng.integers(-_MAX_SHIFT, _MAX_SHIFT + 1)),
            axis=(0, 1),
        )
        if rng.random() < 0.5:
            proto = proto[:, ::-1]
        proto = scale * proto
        bg = _BG_STD * _spectral_field(h, w, rng)
        bg_gain = 0.8 + 0.4 * rng.random(channels)
        tex_scale = max(0.0, 1.0 + _TEX_JITTER * rng.standard_normal())
        tex = np.zeros((h, w))
        for fi, fj in tex_freqs[c]:
            phase = rng.uniform(0, 2 * np.pi)
            tex += _TEX_AMPLITUDE * np.cos(
                2.0 * np.pi * (fi * m_grid / h + fj * n_grid / w) + phase
            )
        for ch in range(channels):
            images[k, ch] = (
                base
                + bg_gain[ch] * bg
                + _BG2_STD * _spectral_field(h, w, rng)
                + proto_color[c, ch] * proto
                + tex_scale * tex_gain[c, ch] * tex
            )
        images[k] += _PIXEL_NOISE * rng.standard_normal((channels, h, w))
    return Dataset(
        clip01(images), labels, split=split, provenance=f"synthetic:seed={seed}"
    )
