"""2D DFT core: transforms, frequency shifting, norms, clipping, and
visualization normalization.

Conventions used throughout the toolkit:

- Images are float64 arrays of shape (C, H, W) with pixel values in [0, 1].
- The forward transform is unnormalized; the inverse carries the 1/(H*W)
  factor. Under this convention Parseval reads ||dft2(x)||^2 = H*W*||x||^2.
- Spectra are complex128; a `shifted` flag records whether the DC bin sits
  at index (H//2, W//2) (shifted) or (0, 0) (unshifted).
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Spectrum",
    "NormalizedImage",
    "as_image",
    "dft2",
    "idft2",
    "fftshift",
    "ifftshift",
    "l2_norm",
    "clip01",
    "normalize_visual",
]


@dataclass(frozen=True)
class Spectrum:
    """Complex Fourier coefficients of shape (..., H, W) plus shift state."""

    coeffs: np.ndarray
    shifted: bool = False

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        if coeffs.ndim < 2:
            raise ValueError("spectrum needs at least 2 dimensions (H, W)")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def height(self) -> int:
        return self.coeffs.shape[-2]

    @property
    def width(self) -> int:
        return self.coeffs.shape[-1]


@dataclass(frozen=True)
class NormalizedImage:
    """Zero-mean unit-variance image together with the statistics removed.

    `mean`/`std` are scalars for whole-image normalization and per-channel
    arrays when normalization was configured per channel.
    """

    data: np.ndarray
    mean: "float | np.ndarray"
    std: "float | np.ndarray"


def as_image(x) -> np.ndarray:
    """Coerce to a float64 (C, H, W) image array; (H, W) gets a channel axis."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[None, :, :]
    if arr.ndim != 3:
        raise ValueError(f"expected (C, H, W) or (H, W) image, got shape {arr.shape}")
    return arr


def dft2(x) -> Spectrum:
    """Unnormalized forward 2D DFT over the trailing two axes."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim < 2:
        raise ValueError("dft2 needs at least 2 dimensions (H, W)")
    return Spectrum(np.fft.fft2(arr, axes=(-2, -1)), shifted=False)


def idft2(s: Spectrum, imag_tol: float = 1e-6) -> np.ndarray:
    """Inverse 2D DFT with 1/(H*W) normalization; returns the real part.

    The input must be in unshifted coordinates, and its inverse must be
    real to within `imag_tol` (the residue is discarded). Both conditions
    signal caller bugs when violated.
    """
    if s.shifted:
        raise ValueError("idft2 requires an unshifted spectrum; apply ifftshift first")
    out = np.fft.ifft2(s.coeffs, axes=(-2, -1))
    residue = float(np.max(np.abs(out.imag))) if out.size else 0.0
    if residue > imag_tol:
        raise ValueError(
            f"inverse transform has imaginary residue {residue:.3g} > {imag_tol:.3g}; "
            "input spectrum is not conjugate-symmetric"
        )
    return out.real


def fftshift(s: Spectrum) -> Spectrum:
    """Move the DC bin to (H//2, W//2)."""
    if s.shifted:
        raise ValueError("spectrum is already shifted")
    return Spectrum(np.fft.fftshift(s.coeffs, axes=(-2, -1)), shifted=True)


def ifftshift(s: Spectrum) -> Spectrum:
    """Inverse of fftshift; valid for odd sizes too."""
    if not s.shifted:
        raise ValueError("spectrum is not shifted")
    return Spectrum(np.fft.ifftshift(s.coeffs, axes=(-2, -1)), shifted=False)


def l2_norm(x) -> float:
    """Euclidean norm over all entries of a real or complex tensor."""
    return float(np.linalg.norm(np.asarray(x).ravel()))


def clip01(x) -> np.ndarray:
    """Elementwise clamp to [0, 1]."""
    return np.clip(np.asarray(x, dtype=np.float64), 0.0, 1.0)


def normalize_visual(x, per_channel: bool = False) -> NormalizedImage:
    """Subtract the pixel mean and divide by the pixel standard deviation.

    By default a single mean/std pair is computed over the whole image
    (all channels); `per_channel=True` normalizes each channel with its
    own statistics. Standard deviations are population (1/N) values.
    """
    arr = as_image(x)
    if per_channel:
        mean = arr.mean(axis=(1, 2), keepdims=True)
        std = arr.std(axis=(1, 2), keepdims=True)
        if np.any(std <= 1e-12 * np.maximum(np.abs(mean), 1.0)):
            raise ValueError("degenerate normalization: constant channel")
        data = (arr - mean) / std
        return NormalizedImage(data, mean.reshape(-1), std.reshape(-1))
    mean = float(arr.mean())
    std = float(arr.std())
    if std <= 1e-12 * max(abs(mean), 1.0):
        raise ValueError("degenerate normalization: constant image")
    return NormalizedImage((arr - mean) / std, mean, std)
