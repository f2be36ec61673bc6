"""Fourier heat maps: per-frequency test error and layer-output change.

Cell (r, c) of a heat map (shifted coordinates) records a model statistic
under the perturbation X + sign * v * U_{i,j} for the frequency (i, j) at
that grid position. Conjugate pairs share one computation by default,
since the zero-phase basis matrix is identical for both members; the RNG
stream of a cell is keyed by the pair's canonical index so the full-grid
validation mode reproduces the mirrored result exactly.
"""

from dataclasses import dataclass

import numpy as np

from ._rng import rng_for
from .basis import FrequencyIndex, PerturbationParams, perturb_batch
from .augment import BandNoiseConfig, band_limited_noise
from .fft import clip01
from .filters import FilterSpec

__all__ = ["HeatMap", "error_heatmap", "layer_heatmap", "bandlimited_error_curve"]


@dataclass(frozen=True)
class HeatMap:
    """Grid of per-frequency statistics in (possibly windowed) shifted coords."""

    grid: np.ndarray
    kind: str  # "error_rate" | "layer_delta"
    norm: float
    sample_count: int
    model_id: str
    layer: str | None = None
    window: int | None = None


def _window_positions(h, w, window):
    """Shifted-coordinate rows/cols covered by a centered window."""
    if window is None:
        return np.arange(h), np.arange(w)
    if window < 1 or window > min(h, w):
        raise ValueError(f"window {window} out of range for {h}x{w} grid")
    r0, c0 = h // 2 - window // 2, w // 2 - window // 2
    return np.arange(r0, r0 + window), np.arange(c0, c0 + window)


def _draw_cell_signs(params, canonical, n, c):
    rng = rng_for(params.seed, "heatmap_cell", canonical.i, canonical.j)
    if params.sign_policy == "+1":
        return np.ones((n, c))
    if params.sign_policy == "-1":
        return -np.ones((n, c))
    return rng.integers(0, 2, size=(n, c)) * 2.0 - 1.0


def _heatmap_grid(images, params, window, clip, full_grid, cell_stat):
    """Shared traversal: fill each grid cell with cell_stat(perturbed batch)."""
    images = np.asarray(images, dtype=np.float64)
    n, c, h, w = images.shape
    rows, cols = _window_positions(h, w, window)
    grid = np.full((rows.size, cols.size), np.nan)
    pos_of = {}
    for a, r in enumerate(rows):
        for b, s in enumerate(cols):
            pos_of[(int(r), int(s))] = (a, b)

    for a, r in enumerate(rows):
        for b, s in enumerate(cols):
            if not np.isnan(grid[a, b]):
                continue  # filled by a mirrored partner
            idx = FrequencyIndex.from_shifted(int(r), int(s), h, w)
            canonical = idx.canonical(h, w)
            signs = _draw_cell_signs(params, canonical, n, c)
            # Perturb along the canonical member: U is mathematically the
            # same for both pair members, and using one array makes the
            # full-grid mode reproduce the mirrored result bit for bit.
            perturbed = perturb_batch(images, canonical, params.v, signs, clip=clip)
            value = cell_stat(perturbed)
            grid[a, b] = value
            if not full_grid:
                mirror = pos_of.get(idx.partner(h, w).to_shifted(h, w))
                if mirror is not None and np.isnan(grid[mirror]):
                    grid[mirror] = value
    return grid


def error_heatmap(
    model,
    images,
    labels,
    params: PerturbationParams,
    window: int | None = None,
    clip: bool = False,
    full_grid: bool = False,
    batch_size: int = 512,
) -> HeatMap:
    """Misclassification rate under each Fourier basis perturbation."""
    images = np.asarray(images, dtype=np.float64)
    labels = np.asarray(labels)
    if images.ndim != 4 or images.shape[0] == 0:
        raise ValueError("expected a nonempty (N, C, H, W) image set")
    n = images.shape[0]

    def cell_stat(perturbed):
        wrong = 0
        for start in range(0, n, batch_size):
            pred = model.predict(perturbed[start : start + batch_size])
            wrong += int(np.count_nonzero(pred != labels[start : start + batch_size]))
        return wrong / n

    grid = _heatmap_grid(images, params, window, clip, full_grid, cell_stat)
    return HeatMap(
        grid=grid,
        kind="error_rate",
        norm=params.v,
        sample_count=n,
        model_id=model.model_id,
        window=window,
    )


def layer_heatmap(
    model,
    images,
    layer: str,
    params: PerturbationParams,
    window: int | None = None,
    clip: bool = False,
    full_grid: bool = False,
    batch_size: int = 512,
) -> HeatMap:
    """Mean per-image norm of the change in a layer's output per frequency."""
    if "layer_taps" not in model.capabilities:
        raise ValueError("model does not expose layer taps")
    if layer not in model.layer_names:
        raise ValueError(f"unknown layer {layer!r}")
    images = np.asarray(images, dtype=np.float64)
    if images.ndim != 4 or images.shape[0] == 0:
        raise ValueError("expected a nonempty (N, C, H, W) image set")
    n = images.shape[0]

    def tap_outputs(batch):
        chunks = []
        for start in range(0, n, batch_size):
            _, taps = model.forward_with_taps(batch[start : start + batch_size], [layer])
            out = np.asarray(taps[layer], dtype=np.float64)
            chunks.append(out.reshape(out.shape[0], -1))
        return np.concatenate(chunks, axis=0)

    clean = tap_outputs(images)

    def cell_stat(perturbed):
        deltas = tap_outputs(perturbed) - clean
        return float(np.mean(np.linalg.norm(deltas, axis=1)))

    grid = _heatmap_grid(images, params, window, clip, full_grid, cell_stat)
    return HeatMap(
        grid=grid,
        kind="layer_delta",
        norm=params.v,
        sample_count=n,
        model_id=model.model_id,
        layer=layer,
        window=window,
    )


def bandlimited_error_curve(
    model,
    images,
    labels,
    mode: str,
    norms,
    bandwidths,
    seed: int = 0,
    clip: bool = False,
    batch_size: int = 512,
) -> list[dict]:
    """Error rate under filtered fixed-norm noise per (bandwidth, norm).

    Noise is drawn per image from a stream keyed by (seed, mode, bandwidth
    index, norm index, image index); norm 0 evaluates the clean images.
    """
    images = np.asarray(images, dtype=np.float64)
    labels = np.asarray(labels)
    n = images.shape[0]
    rows = []
    for bi, b in enumerate(bandwidths):
        spec = FilterSpec(mode, int(b))
        for vi, v in enumerate(norms):
            if v == 0:
                noisy = images
            else:
                cfg = BandNoiseConfig(spec, float(v))
                noisy = np.empty_like(images)
                for k in range(n):
                    rng = rng_for(seed, "bandcurve", mode, bi, vi, k)
                    noisy[k] = images[k] + band_limited_noise(
                        images.shape[1:], cfg, rng=rng
                    )
                if clip:
                    noisy = clip01(noisy)
            wrong = 0
            for start in range(0, n, batch_size):
                pred = model.predict(noisy[start : start + batch_size])
                wrong += int(
                    np.count_nonzero(pred != labels[start : start + batch_size])
                )
            rows.append(
                {
                    "mode": mode,
                    "bandwidth": int(b),
                    "norm": float(v),
                    "error_rate": wrong / n,
                }
            )
    return rows
