"""Independent reference implementations used to pin expected values.

These deliberately avoid the library's own code paths: the DFT oracle is
the quadratic-time double sum, the least-squares oracle solves the normal
equations directly, and gradients come from central finite differences.
"""

import numpy as np


def naive_dft2(x: np.ndarray) -> np.ndarray:
    """Direct O(N^2) evaluation of the unnormalized 2D DFT of one channel."""
    h, w = x.shape
    m = np.arange(h)[:, None]
    n = np.arange(w)[None, :]
    out = np.zeros((h, w), dtype=np.complex128)
    for k in range(h):
        for l in range(w):
            out[k, l] = np.sum(x * np.exp(-2j * np.pi * (k * m / h + l * n / w)))
    return out


def naive_idft2(s: np.ndarray) -> np.ndarray:
    """Direct inverse with 1/(H*W) normalization."""
    h, w = s.shape
    k = np.arange(h)[:, None]
    l = np.arange(w)[None, :]
    out = np.zeros((h, w), dtype=np.complex128)
    for m in range(h):
        for n in range(w):
            out[m, n] = np.sum(s * np.exp(2j * np.pi * (k * m / h + l * n / w)))
    return out / (h * w)


def ols_fit(points) -> tuple[float, float]:
    """Slope and RMS residual from the normal equations."""
    pts = np.asarray(points, dtype=np.float64)
    x, y = pts[:, 0], pts[:, 1]
    a = np.stack([x, np.ones_like(x)], axis=1)
    coef = np.linalg.solve(a.T @ a, a.T @ y)
    resid = y - a @ coef
    return float(coef[0]), float(np.sqrt(np.mean(resid**2)))


def central_diff_grad(f, x: np.ndarray, coords, h: float = 1e-3):
    """Central finite differences of scalar f at the given flat coordinates."""
    grads = {}
    flat = x.ravel()
    for c in coords:
        orig = flat[c]
        flat[c] = orig + h
        fp = f(x)
        flat[c] = orig - h
        fm = f(x)
        flat[c] = orig
        grads[c] = (fp - fm) / (2 * h)
    return grads
