"""Stochastic input transformations: Gaussian augmentation, band-limited
noise of fixed norm, and spectrum-matched additive noise.

Matched noise samples one Gaussian amplitude per conjugate pair of spectral
bins and places it on the zero-phase basis member, so the resulting field is
real and its expected per-bin Fourier magnitude reproduces a target template.
"""

from dataclasses import dataclass

import numpy as np

from ._rng import rng_for
from .fft import clip01
from .filters import FilterSpec, apply_filter

__all__ = [
    "GaussianAugConfig",
    "BandNoiseConfig",
    "SpectralTemplate",
    "gaussian_augment",
    "band_limited_noise",
    "calibrate_template",
    "sample_matched_noise",
    "matched_noise_augment",
]


@dataclass(frozen=True)
class GaussianAugConfig:
    """sigma is the upper end of the per-batch noise scale draw U[0, sigma]."""

    sigma: float
    seed: int = 0
    per_image: bool = False  # ablation: draw one scale per image instead

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")


@dataclass(frozen=True)
class BandNoiseConfig:
    filter: FilterSpec
    target_norm: float
    seed: int = 0

    def __post_init__(self):
        if self.target_norm <= 0:
            raise ValueError("target_norm must be positive")


@dataclass(frozen=True)
class SpectralTemplate:
    """Target mean Fourier magnitude per bin, in shifted coordinates."""

    grid: np.ndarray
    source: str = ""

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=np.float64)
        if grid.ndim != 2:
            raise ValueError("template grid must be 2D (H, W), shifted coordinates")
        if np.any(grid < 0):
            raise ValueError("template magnitudes must be nonnegative")
        object.__setattr__(self, "grid", grid)

    @property
    def shape(self) -> tuple[int, int]:
        return self.grid.shape


def symmetrize_shifted(grid: np.ndarray) -> np.ndarray:
    """Average a shifted-coordinate grid with its conjugate-partner mirror."""
    h, w = grid.shape
    rows = (2 * (h // 2) - np.arange(h)) % h
    cols = (2 * (w // 2) - np.arange(w)) % w
    return 0.5 * (grid + grid[np.ix_(rows, cols)])


def gaussian_augment(
    images: np.ndarray,
    cfg: GaussianAugConfig,
    rng: np.random.Generator | None = None,
    clip: bool = True,
) -> np.ndarray:
    """Add i.i.d. N(0, s^2) noise to every pixel, s ~ U[0, sigma] per batch.

    With sigma == 0 the input array is returned unchanged.
    """
    images = np.asarray(images, dtype=np.float64)
    if cfg.sigma == 0.0:
        return images
    if rng is None:
        rng = rng_for(cfg.seed, "gaussian_augment")
    if cfg.per_image:
        n = images.shape[0]
        scale = rng.uniform(0.0, cfg.sigma, size=(n,) + (1,) * (images.ndim - 1))
    else:
        scale = rng.uniform(0.0, cfg.sigma)
    out = images + scale * rng.standard_normal(images.shape)
    return clip01(out) if clip else out


def band_limited_noise(
    shape: tuple,
    cfg: BandNoiseConfig,
    rng: np.random.Generator | None = None,
    max_retries: int = 8,
) -> np.ndarray:
    """Filtered i.i.d. Gaussian noise rescaled to target_norm per channel."""
    if len(shape) == 2:
        return band_limited_noise((1,) + tuple(shape), cfg, rng=rng)[0]
    if len(shape) != 3:
        raise ValueError("shape must be (C, H, W) or (H, W)")
    c, h, w = shape
    if rng is None:
        rng = rng_for(cfg.seed, "band_limited_noise")
    out = np.empty(shape, dtype=np.float64)
    for ch in range(c):
        for attempt in range(max_retries):
            raw = rng.standard_normal((h, w))
            filtered = apply_filter(raw, cfg.filter)
            norm = np.linalg.norm(filtered)
            if norm > 0:
                out[ch] = filtered * (cfg.target_norm / norm)
                break
        else:
            raise RuntimeError("filtered noise was zero after 8 retries")
    return out


def _self_conjugate_mask_shifted(h: int, w: int) -> np.ndarray:
    rows = np.array([(2 * i) % h == 0 for i in range(h)])
    cols = np.array([(2 * j) % w == 0 for j in range(w)])
    mask_unshifted = np.logical_and.outer(rows, cols)
    return np.fft.fftshift(mask_unshifted)


def calibrate_template(template: SpectralTemplate) -> np.ndarray:
    """Per-bin Gaussian amplitudes sigma[i, j] (shifted coordinates).

    Sampling one a ~ N(0, sigma^2) per conjugate pair and placing it on the
    zero-phase basis member gives |F(n)| = |a| * sqrt(H*W/2) at both bins of
    a pair (sqrt(H*W) at a self-conjugate bin), and E|a| = sigma*sqrt(2/pi),
    so sigma = T * sqrt(pi/2) / sqrt(H*W/2) reproduces E|F(n)[i,j]| = T[i,j].
    """
    h, w = template.shape
    gain = np.full((h, w), np.sqrt(h * w / 2.0))
    gain[_self_conjugate_mask_shifted(h, w)] = np.sqrt(float(h * w))
    return template.grid * np.sqrt(np.pi / 2.0) / gain


def _pair_representatives(h: int, w: int):
    """Index arrays (rep, partner, self-conjugate flag) over conjugate pairs."""
    ii, jj = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    pi, pj = (-ii) % h, (-jj) % w
    is_rep = (ii < pi) | ((ii == pi) & (jj <= pj))
    ri, rj = ii[is_rep], jj[is_rep]
    qi, qj = pi[is_rep], pj[is_rep]
    selfc = (ri == qi) & (rj == qj)
    return ri, rj, qi, qj, selfc


def sample_matched_noise(
    template: SpectralTemplate,
    count: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Draw `count` independent (H, W) matched-noise fields."""
    h, w = template.shape
    sigma_shifted = calibrate_template(template)
    sigma = np.fft.ifftshift(sigma_shifted)
    ri, rj, qi, qj, selfc = _pair_representatives(h, w)
    amp = rng.standard_normal((count, ri.size)) * sigma[ri, rj]
    spec = np.zeros((count, h, w), dtype=np.complex128)
    gain_pair = np.sqrt(h * w / 2.0)
    gain_self = np.sqrt(float(h * w))
    spec[:, ri, rj] = amp * np.where(selfc, gain_self, gain_pair)
    spec[:, qi[~selfc], qj[~selfc]] = amp[:, ~selfc] * gain_pair
    return np.fft.ifft2(spec, axes=(-2, -1)).real


def matched_noise_augment(
    images: np.ndarray,
    template: SpectralTemplate,
    seed: int = 0,
) -> np.ndarray:
    """Add an independent matched-noise field per image and channel; clip."""
    images = np.asarray(images, dtype=np.float64)
    if images.ndim != 4:
        raise ValueError("expected (N, C, H, W) batch")
    n, c, h, w = images.shape
    if (h, w) != template.shape:
        raise ValueError("template dimensions do not match images")
    if not np.any(template.grid):
        return images
    out = np.empty_like(images)
    for idx in range(n):
        noise = sample_matched_noise(template, c, rng_for(seed, "matched_noise", idx))
        out[idx] = images[idx] + noise
    return clip01(out)
