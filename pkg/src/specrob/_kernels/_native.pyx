# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled convolution kernels.

Tap-accumulation direct convolution with OpenMP parallelism: forward and
input-gradient passes parallelize over the batch (disjoint writes), the
weight-gradient pass over output channels, so results are bitwise
reproducible for any thread count.
"""

import os

import numpy as np

cimport numpy as cnp
from cython.parallel cimport prange

BACKEND = "native"


def _thread_count():
    env = os.environ.get("SPECROB_THREADS", "")
    try:
        n = int(env)
    except ValueError:
        n = 0
    if n < 1:
        n = os.cpu_count() or 1
    return n


cdef int NT = _thread_count()


def conv2d_forward(x, w, b):
    """x (N,Cin,H,W), w (Cout,Cin,kh,kw), b (Cout) -> (N,Cout,H,W)."""
    cdef Py_ssize_t n = x.shape[0], cin = x.shape[1], h = x.shape[2], wd = x.shape[3]
    cdef Py_ssize_t cout = w.shape[0], kh = w.shape[2], kw = w.shape[3]
    cdef Py_ssize_t ph = kh // 2, pw = kw // 2
    xp_arr = np.zeros((n, cin, h + 2 * ph, wd + 2 * pw), dtype=np.float64)
    xp_arr[:, :, ph : ph + h, pw : pw + wd] = x
    out_arr = np.empty((n, cout, h, wd), dtype=np.float64)

    cdef double[:, :, :, ::1] xp = xp_arr
    cdef double[:, :, :, ::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef double[:, :, :, ::1] out = out_arr
    cdef Py_ssize_t i, o, c, u, v, r, s
    cdef double coef

    for i in prange(n, nogil=True, num_threads=NT):
        for o in range(cout):
            for r in range(h):
                for s in range(wd):
                    out[i, o, r, s] = bv[o]
            for c in range(cin):
                for u in range(kh):
                    for v in range(kw):
                        coef = wv[o, c, u, v]
                        for r in range(h):
                            for s in range(wd):
                                out[i, o, r, s] += coef * xp[i, c, r + u, s + v]
    return out_arr


def conv2d_backward_input(gy, w):
    """Gradient w.r.t. the conv input (same-padded, odd kernel)."""
    cdef Py_ssize_t n = gy.shape[0], cout = gy.shape[1], h = gy.shape[2], wd = gy.shape[3]
    cdef Py_ssize_t cin = w.shape[1], kh = w.shape[2], kw = w.shape[3]
    cdef Py_ssize_t ph = kh // 2, pw = kw // 2
    gp_arr = np.zeros((n, cout, h + 2 * ph, wd + 2 * pw), dtype=np.float64)
    gp_arr[:, :, ph : ph + h, pw : pw + wd] = gy
    gx_arr = np.zeros((n, cin, h, wd), dtype=np.float64)

    cdef double[:, :, :, ::1] gp = gp_arr
    cdef double[:, :, :, ::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef double[:, :, :, ::1] gx = gx_arr
    cdef Py_ssize_t i, o, c, u, v, r, s
    cdef double coef

    for i in prange(n, nogil=True, num_threads=NT):
        for c in range(cin):
            for o in range(cout):
                for u in range(kh):
                    for v in range(kw):
                        coef = wv[o, c, u, v]
                        for r in range(h):
                            for s in range(wd):
                                gx[i, c, r, s] += coef * gp[i, o, r + kh - 1 - u, s + kw - 1 - v]
    return gx_arr


cdef inline double _plane_dot(const double* g, const double* xpad,
                              Py_ssize_t h, Py_ssize_t wd,
                              Py_ssize_t wpad) noexcept nogil:
    """Sum over an h x wd window of g[r, s] * xpad[r, s] (row strides wd
    and wpad). Eight explicit partial sums stride the row: the summation
    order is fixed in source, and the compiler can map the lane loop onto
    SIMD without reassociating anything."""
    cdef double lanes[8]
    cdef double acc = 0.0
    cdef Py_ssize_t r, s, k, tail = wd - (wd % 8)
    cdef const double* grow
    cdef const double* xrow
    for k in range(8):
        lanes[k] = 0.0
    for r in range(h):
        grow = g + r * wd
        xrow = xpad + r * wpad
        for s in range(0, tail, 8):
            for k in range(8):
                lanes[k] += grow[s + k] * xrow[s + k]
        for s in range(tail, wd):
            lanes[s - tail] += grow[s] * xrow[s]
    for k in range(8):
        acc += lanes[k]
    return acc


cdef inline double _plane_sum(const double* g, Py_ssize_t count) noexcept nogil:
    cdef double acc = 0.0
    cdef Py_ssize_t s
    for s in range(count):
        acc += g[s]
    return acc


def conv2d_backward_weights(x, gy, kh_py, kw_py):
    """Gradients w.r.t. kernel weights and bias."""
    cdef Py_ssize_t n = x.shape[0], cin = x.shape[1], h = x.shape[2], wd = x.shape[3]
    cdef Py_ssize_t cout = gy.shape[1]
    cdef Py_ssize_t kh = kh_py, kw = kw_py
    cdef Py_ssize_t ph = kh // 2, pw = kw // 2
    xp_arr = np.zeros((n, cin, h + 2 * ph, wd + 2 * pw), dtype=np.float64)
    xp_arr[:, :, ph : ph + h, pw : pw + wd] = x
    gw_arr = np.zeros((cout, cin, kh, kw), dtype=np.float64)
    gb_arr = np.zeros(cout, dtype=np.float64)

    cdef double[:, :, :, ::1] xp = xp_arr
    cdef double[:, :, :, ::1] gyv = np.ascontiguousarray(gy, dtype=np.float64)
    cdef double[:, :, :, ::1] gw = gw_arr
    cdef double[::1] gb = gb_arr
    cdef Py_ssize_t wpad = wd + 2 * pw
    cdef Py_ssize_t i, o, c, u, v

    for o in prange(cout, nogil=True, num_threads=NT):
        for i in range(n):
            gb[o] += _plane_sum(&gyv[i, o, 0, 0], h * wd)
            for c in range(cin):
                for u in range(kh):
                    for v in range(kw):
                        gw[o, c, u, v] += _plane_dot(
                            &gyv[i, o, 0, 0], &xp[i, c, u, v], h, wd, wpad
                        )
    return gw_arr, gb_arr
