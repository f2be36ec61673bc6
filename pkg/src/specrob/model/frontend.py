"""Filter front ends: fixed low/high pass preprocessing for models.

A low-pass front end clips the filtered image back to [0, 1]; a high-pass
front end standardizes each image to zero mean and unit variance (its
output is visually near-invisible otherwise and carries almost no DC).
Both transforms have exact vector-Jacobian products so gradient-based
attacks and finite-difference checks see the true model function.
"""

import numpy as np

from ..filters import FilterSpec, apply_filter

__all__ = ["front_end_transform", "front_end_vjp"]

_STD_FLOOR = 1e-12


def _batch_stats(u):
    axes = tuple(range(1, u.ndim))
    mean = u.mean(axis=axes, keepdims=True)
    std = u.std(axis=axes, keepdims=True)
    return mean, std


def front_end_transform(x: np.ndarray, spec: FilterSpec | None) -> np.ndarray:
    """Apply a filter front end to an (N, C, H, W) batch (None = identity)."""
    if spec is None:
        return x
    u = apply_filter(x, spec)
    if spec.mode == "low":
        return np.clip(u, 0.0, 1.0)
    mean, std = _batch_stats(u)
    safe = np.maximum(std, _STD_FLOOR)
    out = (u - mean) / safe
    return np.where(std > _STD_FLOOR, out, 0.0)


def front_end_vjp(x: np.ndarray, spec: FilterSpec | None, g: np.ndarray) -> np.ndarray:
    """Chain a gradient back through front_end_transform at input x."""
    if spec is None:
        return g
    u = apply_filter(x, spec)
    if spec.mode == "low":
        inside = (u > 0.0) & (u < 1.0)
        return apply_filter(g * inside, spec)
    mean, std = _batch_stats(u)
    safe = np.maximum(std, _STD_FLOOR)
    y = (u - mean) / safe
    axes = tuple(range(1, u.ndim))
    count = np.prod(u.shape[1:])
    g_mean = g.mean(axis=axes, keepdims=True)
    yg = (y * g).sum(axis=axes, keepdims=True) / count
    gu = (g - g_mean - y * yg) / safe
    gu = np.where(std > _STD_FLOOR, gu, 0.0)
    return apply_filter(gu, spec)
