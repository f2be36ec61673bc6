"""Serialization and ingestion: datasets, tensors, checkpoints, CSV, PNG,
experiment configs."""

from .checkpoint import load_checkpoint, save_checkpoint
from .config import config_hash, load_config, validate_config, write_manifest
from .csvio import (
    load_energy_csv,
    load_heatmap,
    load_matrix_csv,
    load_report,
    save_bandcurve_csv,
    save_energy_csv,
    save_heatmap,
    save_matrix_csv,
    save_report,
)
from .datasets import (
    Dataset,
    load_cifar10_binary,
    load_dataset,
    make_synthetic_dataset,
    save_cifar10_binary,
    save_dataset,
)
from .npyio import load_tensor, save_tensor
from .pngio import COLOR_RAMP, render_heatmap_png, write_png_rgb

__all__ = [
    "COLOR_RAMP",
    "Dataset",
    "config_hash",
    "load_cifar10_binary",
    "load_checkpoint",
    "load_config",
    "load_dataset",
    "load_energy_csv",
    "load_heatmap",
    "load_matrix_csv",
    "load_report",
    "load_tensor",
    "make_synthetic_dataset",
    "render_heatmap_png",
    "save_bandcurve_csv",
    "save_cifar10_binary",
    "save_checkpoint",
    "save_dataset",
    "save_energy_csv",
    "save_heatmap",
    "save_matrix_csv",
    "save_report",
    "save_tensor",
    "validate_config",
    "write_manifest",
    "write_png_rgb",
]
