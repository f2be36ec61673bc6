"""Pure-numpy convolution kernels (im2col + BLAS matmul).

Fallback backend used when the compiled extension is unavailable. All
kernels assume stride 1, odd kernel sizes, and "same" zero padding, which
is all the built-in architectures need.
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

BACKEND = "python"


def _pad_same(x: np.ndarray, kh: int, kw: int) -> np.ndarray:
    ph, pw = kh // 2, kw // 2
    return np.pad(x, ((0, 0), (0, 0), (ph, ph), (pw, pw)))


def conv2d_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """x (N,Cin,H,W), w (Cout,Cin,kh,kw), b (Cout) -> (N,Cout,H,W)."""
    n, cin, h, wd = x.shape
    cout, _, kh, kw = w.shape
    win = sliding_window_view(_pad_same(x, kh, kw), (kh, kw), axis=(2, 3))
    cols = win.transpose(0, 2, 3, 1, 4, 5).reshape(n, h, wd, cin * kh * kw)
    y = cols @ w.reshape(cout, -1).T + b
    return np.ascontiguousarray(y.transpose(0, 3, 1, 2))


def conv2d_backward_input(gy: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Gradient w.r.t. the conv input: correlate gy with the flipped kernel."""
    cin = w.shape[1]
    wt = np.ascontiguousarray(w[:, :, ::-1, ::-1].transpose(1, 0, 2, 3))
    return conv2d_forward(gy, wt, np.zeros(cin))


def conv2d_backward_weights(
    x: np.ndarray, gy: np.ndarray, kh: int, kw: int
) -> tuple[np.ndarray, np.ndarray]:
    """Gradients w.r.t. kernel weights and bias."""
    n, cin, h, wd = x.shape
    cout = gy.shape[1]
    win = sliding_window_view(_pad_same(x, kh, kw), (kh, kw), axis=(2, 3))
    cols = win.transpose(1, 4, 5, 0, 2, 3).reshape(cin * kh * kw, n * h * wd)
    gyr = gy.transpose(1, 0, 2, 3).reshape(cout, n * h * wd)
    gw = (gyr @ cols.T).reshape(cout, cin, kh, kw)
    gb = gy.sum(axis=(0, 2, 3))
    return gw, gb
