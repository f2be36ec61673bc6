"""Centered-square low/high pass filtering with bandwidth B.

A filter keeps a B x B square of spectral bins. For a low pass the square
is centered on the DC bin of the fftshifted spectrum; for a high pass it
is centered on the highest frequency, i.e. the spectrum is rolled so that
unshifted bin (ceil(H/2), ceil(W/2)) sits at the center. With center
c = dim//2 the kept range along each axis is [c - B//2, c - B//2 + B - 1],
which keeps exactly B^2 bins for every legal B on both parities.
"""

from dataclasses import dataclass

import numpy as np

from .fft import Spectrum, dft2, idft2

__all__ = ["FilterSpec", "filter_mask", "apply_filter"]


@dataclass(frozen=True)
class FilterSpec:
    mode: str  # "low" | "high"
    bandwidth: int

    def __post_init__(self):
        if self.mode not in ("low", "high"):
            raise ValueError("filter mode must be 'low' or 'high'")
        if self.bandwidth < 1:
            raise ValueError("bandwidth must be >= 1")


def _check_bandwidth(h: int, w: int, spec: FilterSpec):
    if spec.bandwidth > min(h, w):
        raise ValueError(
            f"bandwidth {spec.bandwidth} exceeds image dimensions {h}x{w}"
        )


def filter_mask(h: int, w: int, spec: FilterSpec) -> np.ndarray:
    """Boolean (H, W) grid of kept bins in unshifted coordinates.

    Computed by direct index arithmetic, independently of apply_filter's
    shift/slice route; the two must agree (tested property).
    """
    _check_bandwidth(h, w, spec)
    b = spec.bandwidth

    def axis_keep(dim: int) -> np.ndarray:
        c = dim // 2
        lo = c - b // 2
        k = np.arange(dim)
        if spec.mode == "low":
            pos = (k + dim // 2) % dim  # fftshift position of unshifted bin k
        else:
            pos = (k - (dim % 2)) % dim  # Nyquist-centered position
        return (pos >= lo) & (pos < lo + b)

    return np.logical_and.outer(axis_keep(h), axis_keep(w))


def _centering_shift(dim: int, mode: str) -> int:
    # np.roll amount taking an unshifted axis to the mode's centering.
    if mode == "low":
        return dim // 2
    return -(dim % 2)


def _mask_is_symmetric(mask: np.ndarray) -> bool:
    h, w = mask.shape
    rows = (-np.arange(h)) % h
    cols = (-np.arange(w)) % w
    return bool(np.array_equal(mask, mask[np.ix_(rows, cols)]))


def apply_filter(x: np.ndarray, spec: FilterSpec) -> np.ndarray:
    """Filter each channel of x; output is real and NOT clipped.

    Route: forward transform, roll to the mode's centering, zero outside
    the kept square, roll back, inverse transform. The kept square must be
    closed under conjugate pairing or the output of a real image would be
    complex; that holds for odd bandwidths on a low pass, odd (even)
    bandwidths on a high pass over even (odd) dimensions, and any full
    cover.
    """
    arr = np.asarray(x, dtype=np.float64)
    h, w = arr.shape[-2], arr.shape[-1]
    _check_bandwidth(h, w, spec)
    if not _mask_is_symmetric(filter_mask(h, w, spec)):
        raise ValueError(
            f"{spec.mode}-pass bandwidth {spec.bandwidth} on {h}x{w} keeps a "
            "square that is not conjugate-symmetric, so no real-valued "
            "filter output exists; adjust the bandwidth parity"
        )
    b = spec.bandwidth
    sh, sw = _centering_shift(h, spec.mode), _centering_shift(w, spec.mode)

    coeffs = np.fft.fft2(arr, axes=(-2, -1))
    centered = np.roll(coeffs, (sh, sw), axis=(-2, -1))
    kept = np.zeros_like(centered)
    r0, c0 = h // 2 - b // 2, w // 2 - b // 2
    kept[..., r0 : r0 + b, c0 : c0 + b] = centered[..., r0 : r0 + b, c0 : c0 + b]
    out = idft2(Spectrum(np.roll(kept, (-sh, -sw), axis=(-2, -1))))
    return out
