# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: same-padded stride-1 convolution and 2x2 max pooling.

Straightforward loop nests over typed memoryviews; no im2col, no FFT.
Accumulation order is fixed, so results are deterministic run to run.
The API and numbering conventions match ferlite.kernels._numpy exactly.
"""

import numpy as np

ctypedef fused floating:
    float
    double


def conv2d_forward(floating[:, :, :, ::1] x, floating[:, :, :, ::1] w,
                   floating[::1] b):
    cdef Py_ssize_t n = x.shape[0], ci = x.shape[1], h = x.shape[2], wd = x.shape[3]
    cdef Py_ssize_t co = w.shape[0], k = w.shape[2], pad = k // 2
    if floating is float:
        out_np = np.empty((n, co, h, wd), dtype=np.float32)
    else:
        out_np = np.empty((n, co, h, wd), dtype=np.float64)
    cdef floating[:, :, :, ::1] out = out_np
    cdef Py_ssize_t bb, o, c, ki, kj, y, xx, oy, ox, y0, y1, x0, x1
    cdef floating wv, bv

    with nogil:
        for bb in range(n):
            for o in range(co):
                bv = b[o]
                for y in range(h):
                    for xx in range(wd):
                        out[bb, o, y, xx] = bv
                for c in range(ci):
                    for ki in range(k):
                        oy = ki - pad
                        y0 = -oy if oy < 0 else 0
                        y1 = h - oy if oy > 0 else h
                        for kj in range(k):
                            ox = kj - pad
                            x0 = -ox if ox < 0 else 0
                            x1 = wd - ox if ox > 0 else wd
                            wv = w[o, c, ki, kj]
                            for y in range(y0, y1):
                                for xx in range(x0, x1):
                                    out[bb, o, y, xx] += wv * x[bb, c, y + oy, xx + ox]
    return out_np


def conv2d_backward(floating[:, :, :, ::1] x, floating[:, :, :, ::1] w,
                    floating[:, :, :, ::1] gy):
    cdef Py_ssize_t n = x.shape[0], ci = x.shape[1], h = x.shape[2], wd = x.shape[3]
    cdef Py_ssize_t co = w.shape[0], k = w.shape[2], pad = k // 2
    if floating is float:
        dt = np.float32
    else:
        dt = np.float64
    gx_np = np.zeros((n, ci, h, wd), dtype=dt)
    gw_np = np.zeros((co, ci, k, k), dtype=dt)
    gb_np = np.zeros(co, dtype=dt)
    cdef floating[:, :, :, ::1] gx = gx_np
    cdef floating[:, :, :, ::1] gw = gw_np
    cdef floating[::1] gb = gb_np
    cdef Py_ssize_t bb, o, c, ki, kj, y, xx, oy, ox, y0, y1, x0, x1
    cdef floating wv, acc, g

    with nogil:
        for bb in range(n):
            for o in range(co):
                acc = 0
                for y in range(h):
                    for xx in range(wd):
                        acc += gy[bb, o, y, xx]
                gb[o] += acc
                for c in range(ci):
                    for ki in range(k):
                        oy = ki - pad
                        y0 = -oy if oy < 0 else 0
                        y1 = h - oy if oy > 0 else h
                        for kj in range(k):
                            ox = kj - pad
                            x0 = -ox if ox < 0 else 0
                            x1 = wd - ox if ox > 0 else wd
                            wv = w[o, c, ki, kj]
                            acc = 0
                            for y in range(y0, y1):
                                for xx in range(x0, x1):
                                    g = gy[bb, o, y, xx]
                                    acc += x[bb, c, y + oy, xx + ox] * g
                                    gx[bb, c, y + oy, xx + ox] += wv * g
                            gw[o, c, ki, kj] += acc
    return gx_np, gw_np, gb_np


def maxpool2_forward(floating[:, :, :, ::1] x):
    cdef Py_ssize_t n = x.shape[0], c = x.shape[1], h = x.shape[2], wd = x.shape[3]
    cdef Py_ssize_t h2 = h // 2, w2 = wd // 2
    if floating is float:
        out_np = np.empty((n, c, h2, w2), dtype=np.float32)
    else:
        out_np = np.empty((n, c, h2, w2), dtype=np.float64)
    idx_np = np.empty((n, c, h2, w2), dtype=np.uint8)
    cdef floating[:, :, :, ::1] out = out_np
    cdef unsigned char[:, :, :, ::1] idx = idx_np
    cdef Py_ssize_t bb, cc, i, j, di, dj
    cdef floating best, v
    cdef unsigned char pos

    with nogil:
        for bb in range(n):
            for cc in range(c):
                for i in range(h2):
                    for j in range(w2):
                        best = x[bb, cc, 2 * i, 2 * j]
                        pos = 0
                        for di in range(2):
                            for dj in range(2):
                                v = x[bb, cc, 2 * i + di, 2 * j + dj]
                                if v > best:
                                    best = v
                                    pos = <unsigned char>(2 * di + dj)
                        out[bb, cc, i, j] = best
                        idx[bb, cc, i, j] = pos
    return out_np, idx_np


def maxpool2_backward(unsigned char[:, :, :, ::1] idx, floating[:, :, :, ::1] gy):
    cdef Py_ssize_t n = gy.shape[0], c = gy.shape[1], h2 = gy.shape[2], w2 = gy.shape[3]
    if floating is float:
        gx_np = np.zeros((n, c, h2 * 2, w2 * 2), dtype=np.float32)
    else:
        gx_np = np.zeros((n, c, h2 * 2, w2 * 2), dtype=np.float64)
    cdef floating[:, :, :, ::1] gx = gx_np
    cdef Py_ssize_t bb, cc, i, j
    cdef unsigned char pos

    with nogil:
        for bb in range(n):
            for cc in range(c):
                for i in range(h2):
                    for j in range(w2):
                        pos = idx[bb, cc, i, j]
                        gx[bb, cc, 2 * i + pos // 2, 2 * j + pos % 2] = gy[bb, cc, i, j]
    return gx_np
