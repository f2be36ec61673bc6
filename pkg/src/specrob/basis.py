"""Real 2D Fourier basis matrices and basis-aligned image perturbations.

The basis matrix for frequency (i, j) on an H x W grid is the unit-norm
real matrix whose spectrum is supported exactly on bin (i, j) and its
conjugate partner ((-i) mod H, (-j) mod W). The phase is fixed to zero
(pure cosine) so that results are reproducible and the matrix for an index
equals the matrix for its partner.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._rng import rng_for
from .fft import clip01

__all__ = [
    "FrequencyIndex",
    "BasisMatrix",
    "PerturbationParams",
    "basis_matrix",
    "basis_perturb",
    "perturb_batch",
]

SIGN_POLICIES = ("random", "+1", "-1")


@dataclass(frozen=True)
class FrequencyIndex:
    """A spectral bin in unshifted coordinates: 0 <= i < H, 0 <= j < W."""

    i: int
    j: int

    def partner(self, h: int, w: int) -> "FrequencyIndex":
        """The conjugate-symmetric bin ((-i) mod H, (-j) mod W)."""
        return FrequencyIndex((-self.i) % h, (-self.j) % w)

    def is_self_conjugate(self, h: int, w: int) -> bool:
        return self.partner(h, w) == self

    def canonical(self, h: int, w: int) -> "FrequencyIndex":
        """Lexicographically smaller of the index and its partner."""
        p = self.partner(h, w)
        return self if (self.i, self.j) <= (p.i, p.j) else p

    def to_shifted(self, h: int, w: int) -> tuple[int, int]:
        """Grid position after fftshift (DC lands at (H//2, W//2))."""
        return (self.i + h // 2) % h, (self.j + w // 2) % w

    @staticmethod
    def from_shifted(row: int, col: int, h: int, w: int) -> "FrequencyIndex":
        return FrequencyIndex((row - h // 2) % h, (col - w // 2) % w)


@dataclass(frozen=True)
class BasisMatrix:
    index: FrequencyIndex
    data: np.ndarray


@dataclass(frozen=True)
class PerturbationParams:
    """Norm, per-channel sign policy, and seed for basis perturbations."""

    v: float
    sign_policy: str = "random"
    seed: int = 0

    def __post_init__(self):
        if self.v < 0:
            raise ValueError("perturbation norm v must be nonnegative")
        if self.sign_policy not in SIGN_POLICIES:
            raise ValueError(f"sign_policy must be one of {SIGN_POLICIES}")


@lru_cache(maxsize=2048)
def _basis_data(i: int, j: int, h: int, w: int) -> np.ndarray:
    m = np.arange(h, dtype=np.float64)[:, None]
    n = np.arange(w, dtype=np.float64)[None, :]
    mat = np.cos(2.0 * np.pi * (i * m / h + j * n / w))
    mat /= np.linalg.norm(mat)
    mat.flags.writeable = False  # cached; shared across concurrent readers
    return mat


def basis_matrix(idx: FrequencyIndex, h: int, w: int) -> BasisMatrix:
    """Unit-norm zero-phase basis matrix for `idx` on an H x W grid."""
    if not (0 <= idx.i < h and 0 <= idx.j < w):
        raise ValueError(f"index {idx} out of range for {h}x{w} grid")
    return BasisMatrix(idx, _basis_data(idx.i, idx.j, h, w))


def _draw_signs(shape, policy: str, rng: np.random.Generator) -> np.ndarray:
    if policy == "+1":
        return np.ones(shape)
    if policy == "-1":
        return -np.ones(shape)
    return rng.integers(0, 2, size=shape) * 2.0 - 1.0


def perturb_batch(
    images: np.ndarray,
    idx: FrequencyIndex,
    v: float,
    signs: np.ndarray,
    clip: bool = False,
) -> np.ndarray:
    """Add signs[n, c] * v * U_idx to each channel of a (N, C, H, W) batch."""
    images = np.asarray(images, dtype=np.float64)
    n, c, h, w = images.shape
    if signs.shape != (n, c):
        raise ValueError("signs must have shape (N, C)")
    u = basis_matrix(idx, h, w).data
    out = images + signs[:, :, None, None] * (v * u)
    return clip01(out) if clip else out


def basis_perturb(
    x: np.ndarray,
    idx: FrequencyIndex,
    params: PerturbationParams,
    clip: bool = False,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Perturb one (C, H, W) image along a Fourier basis direction.

    Each channel receives sign * v * U_idx with the sign drawn per channel
    under the configured policy. The per-channel delta has norm exactly v;
    clipping (off by default) is applied afterwards when requested.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 3:
        raise ValueError("basis_perturb expects a (C, H, W) image")
    c, h, w = x.shape
    if not (0 <= idx.i < h and 0 <= idx.j < w):
        raise ValueError(f"index {idx} out of range for {h}x{w} image")
    if params.v == 0.0:
        return x
    if rng is None:
        rng = rng_for(params.seed, "basis_perturb", idx.i, idx.j)
    signs = _draw_signs((1, c), params.sign_policy, rng)
    return perturb_batch(x[None], idx, params.v, signs, clip=clip)[0]
