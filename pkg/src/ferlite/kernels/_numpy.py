"""Pure-numpy kernels: same-padded 3x3-style convolution and 2x2 max pooling.

Fallback implementations used when the compiled extension is unavailable.
Convolution is computed by accumulating the K*K shifted slices (no im2col);
the channel contraction per offset is a single einsum.  Inputs are assumed
validated and C-contiguous float32/float64 (see ferlite.nn).
"""

import numpy as np


def _pad_same(x, pad):
    if pad == 0:
        return x
    b, c, h, w = x.shape
    xp = np.zeros((b, c, h + 2 * pad, w + 2 * pad), dtype=x.dtype)
    xp[:, :, pad:pad + h, pad:pad + w] = x
    return xp


def conv2d_forward(x, w, b):
    """x [B,Ci,H,W], w [Co,Ci,K,K], b [Co] -> [B,Co,H,W] (stride 1, zero pad)."""
    n, _, h, wd = x.shape
    co, _, k, _ = w.shape
    pad = k // 2
    xp = _pad_same(x, pad)
    out = np.zeros((n, co, h, wd), dtype=x.dtype)
    for ki in range(k):
        for kj in range(k):
            out += np.einsum(
                "bchw,oc->bohw", xp[:, :, ki:ki + h, kj:kj + wd], w[:, :, ki, kj],
                optimize=True,
            )
    out += b.reshape(1, co, 1, 1)
    return out


def conv2d_backward(x, w, gy):
    """Gradients of conv2d_forward: returns (gx, gw, gb)."""
    n, _, h, wd = x.shape
    co, _, k, _ = w.shape
    pad = k // 2
    xp = _pad_same(x, pad)
    gw = np.zeros_like(w)
    gxp = np.zeros_like(xp)
    for ki in range(k):
        for kj in range(k):
            patch = xp[:, :, ki:ki + h, kj:kj + wd]
            gw[:, :, ki, kj] = np.einsum("bchw,bohw->oc", patch, gy, optimize=True)
            gxp[:, :, ki:ki + h, kj:kj + wd] += np.einsum(
                "bohw,oc->bchw", gy, w[:, :, ki, kj], optimize=True
            )
    gb = gy.sum(axis=(0, 2, 3))
    gx = np.ascontiguousarray(gxp[:, :, pad:pad + h, pad:pad + wd])
    return gx, gw, gb


def maxpool2_forward(x):
    """x [B,C,H,W] with even H,W -> (out [B,C,H/2,W/2], argmax idx uint8 0..3).

    Window positions are numbered row-major ((0,0)=0, (0,1)=1, (1,0)=2,
    (1,1)=3); ties keep the first maximum, matching the compiled kernel.
    """
    n, c, h, w = x.shape
    win = x.reshape(n, c, h // 2, 2, w // 2, 2).transpose(0, 1, 2, 4, 3, 5)
    win = win.reshape(n, c, h // 2, w // 2, 4)
    idx = win.argmax(axis=4).astype(np.uint8)
    out = np.take_along_axis(win, idx[..., None].astype(np.intp), axis=4)[..., 0]
    return np.ascontiguousarray(out), idx


def maxpool2_backward(idx, gy):
    """Route gy to the recorded argmax positions; zero elsewhere."""
    n, c, h2, w2 = gy.shape
    win = np.zeros((n, c, h2, w2, 4), dtype=gy.dtype)
    np.put_along_axis(win, idx[..., None].astype(np.intp), gy[..., None], axis=4)
    gx = win.reshape(n, c, h2, w2, 2, 2).transpose(0, 1, 2, 4, 3, 5)
    return np.ascontiguousarray(gx.reshape(n, c, h2 * 2, w2 * 2))
