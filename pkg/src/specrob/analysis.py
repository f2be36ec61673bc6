"""Spectrum estimation and energy-fraction metrics.

Estimates mean Fourier magnitudes of datasets and corruption deltas, the
high-frequency energy fraction ||H(delta)||^2 / ||delta||^2, and the
aggregate spectrum of successful adversarial perturbations.
"""

from dataclasses import dataclass

import numpy as np

from .augment import SpectralTemplate, symmetrize_shifted
from .corruptions import CorruptionSpec, apply_corruption_batch
from .filters import FilterSpec, filter_mask

__all__ = [
    "dataset_spectrum",
    "corruption_delta_spectrum",
    "energy_fraction",
    "corruption_energy_fraction",
    "AdvSpectrumResult",
    "adv_perturbation_spectrum",
]

DEFAULT_ENERGY_BANDWIDTH = 27


def _as_batch(images) -> np.ndarray:
    arr = np.asarray(images, dtype=np.float64)
    if arr.ndim == 3:
        arr = arr[None]
    if arr.ndim != 4:
        raise ValueError("expected (N, C, H, W) images")
    if arr.shape[0] == 0:
        raise ValueError("empty image set")
    return arr


def _mean_magnitude(fields: np.ndarray) -> np.ndarray:
    """Mean |F| over leading axes, fftshifted and exactly symmetrized."""
    mags = np.abs(np.fft.fft2(fields, axes=(-2, -1)))
    grid = np.fft.fftshift(mags.mean(axis=tuple(range(mags.ndim - 2))), axes=(-2, -1))
    return symmetrize_shifted(grid)


def dataset_spectrum(images, source: str = "dataset") -> SpectralTemplate:
    """E[|F(X)|] per bin, averaged over images and channels."""
    batch = _as_batch(images)
    return SpectralTemplate(_mean_magnitude(batch), source=source)


def corruption_delta_spectrum(images, spec: CorruptionSpec) -> SpectralTemplate:
    """E[|F(C(X) - X)|] per bin over a batch."""
    batch = _as_batch(images)
    deltas = apply_corruption_batch(batch, spec) - batch
    return SpectralTemplate(
        _mean_magnitude(deltas), source=f"{spec.name}-s{spec.severity}"
    )


def energy_fraction(delta, bandwidth: int = DEFAULT_ENERGY_BANDWIDTH) -> float:
    """Fraction of a delta's spectral energy kept by a high-pass of width B."""
    arr = np.asarray(delta, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[None]
    h, w = arr.shape[-2], arr.shape[-1]
    power = np.abs(np.fft.fft2(arr, axes=(-2, -1))) ** 2
    total = float(power.sum())
    if total == 0.0:
        raise ValueError("energy fraction of a zero delta is undefined")
    mask = filter_mask(h, w, FilterSpec("high", bandwidth))
    return float(power[..., mask].sum()) / total


def corruption_energy_fraction(
    images,
    name: str,
    severities=(1, 2, 3, 4, 5),
    bandwidth: int = DEFAULT_ENERGY_BANDWIDTH,
    seed: int = 0,
) -> tuple[float, dict[int, float]]:
    """Per-image energy fractions averaged over a batch and severities.

    Returns (overall mean, {severity: mean}).
    """
    batch = _as_batch(images)
    per_severity: dict[int, float] = {}
    for s in severities:
        spec = CorruptionSpec(name, s, seed=seed)
        deltas = apply_corruption_batch(batch, spec) - batch
        fractions = [
            energy_fraction(d, bandwidth)
            for d in deltas
            if float(np.abs(d).max()) > 0.0
        ]
        if not fractions:
            raise ValueError(f"{name} severity {s} produced only zero deltas")
        per_severity[s] = float(np.mean(fractions))
    return float(np.mean(list(per_severity.values()))), per_severity


@dataclass(frozen=True)
class AdvSpectrumResult:
    template: SpectralTemplate
    success_rate: float
    n_success: int
    n_zero_delta: int


def adv_perturbation_spectrum(
    model,
    images,
    labels,
    pgd_config,
    batch_size: int = 256,
) -> AdvSpectrumResult:
    """Mean |F(x_adv - x)| over successful, nonzero-delta attacks.

    Already-misclassified inputs that the attack leaves untouched produce
    zero deltas; they are excluded from the average and counted separately.
    """
    from .model.attack import pgd_attack  # deferred: avoid import cycle

    batch = _as_batch(images)
    labels = np.asarray(labels)
    mag_sum = None
    n_success = 0
    n_zero = 0
    n_total = batch.shape[0]
    for start in range(0, n_total, batch_size):
        x = batch[start : start + batch_size]
        y = labels[start : start + batch_size]
        x_adv, success = pgd_attack(model, x, y, pgd_config)
        deltas = x_adv - x
        nonzero = np.abs(deltas).max(axis=(1, 2, 3)) > 0.0
        keep = success & nonzero
        n_zero += int(np.count_nonzero(success & ~nonzero))
        n_success += int(np.count_nonzero(success))
        if np.any(keep):
            mags = np.abs(np.fft.fft2(deltas[keep], axes=(-2, -1)))
            contrib = mags.sum(axis=(0, 1))
            mag_sum = contrib if mag_sum is None else mag_sum + contrib
    if mag_sum is None:
        raise ValueError("no successful perturbations with nonzero delta")
    n_kept = n_success - n_zero
    grid = np.fft.fftshift(mag_sum / (n_kept * batch.shape[1]))
    return AdvSpectrumResult(
        template=SpectralTemplate(symmetrize_shifted(grid), source="pgd"),
        success_rate=n_success / n_total,
        n_success=n_success,
        n_zero_delta=n_zero,
    )
