"""Frequency-domain robustness analysis for image classifiers.

Fourier basis heat maps, band-pass filter front ends, frequency-targeted
augmentation, corruption spectrum statistics, robustness metrics (mCE,
energy-fraction scatter fits), and adversarial perturbation spectra,
against a small built-in trainable classifier or any external classifier
speaking the NDJSON wire protocol.
"""

__version__ = "0.1.0"

from ._rng import rng_for
from .analysis import (
    AdvSpectrumResult,
    adv_perturbation_spectrum,
    corruption_delta_spectrum,
    corruption_energy_fraction,
    dataset_spectrum,
    energy_fraction,
)
from .augment import (
    BandNoiseConfig,
    GaussianAugConfig,
    SpectralTemplate,
    band_limited_noise,
    calibrate_template,
    gaussian_augment,
    matched_noise_augment,
    sample_matched_noise,
)
from .basis import (
    BasisMatrix,
    FrequencyIndex,
    PerturbationParams,
    basis_matrix,
    basis_perturb,
)
from .corruptions import (
    CorruptionSpec,
    apply_corruption,
    apply_corruption_batch,
    corruption_suite,
)
from .fft import (
    NormalizedImage,
    Spectrum,
    clip01,
    dft2,
    fftshift,
    idft2,
    ifftshift,
    l2_norm,
    normalize_visual,
)
from .filters import FilterSpec, apply_filter, filter_mask
from .heatmap import HeatMap, bandlimited_error_curve, error_heatmap, layer_heatmap
from .metrics import (
    MetricsReport,
    accuracy_table,
    evaluate_error_grid,
    mce,
    scatter_fit,
    scatter_points,
)
from ._kernels import BACKEND as KERNEL_BACKEND
