"""Differentiable layer primitives (forward + hand-written backward).

All functions operate on plain numpy arrays in float32 (training) or
float64 (gradient-check mode); the dtype of the inputs is preserved.
Convolution and max pooling dispatch to ferlite.kernels (compiled or
numpy backend); everything else is numpy.

Convolution is stride 1 with zero "same" padding, so spatial dimensions
are unchanged; 2x2 max pooling halves them and requires even inputs.
"""

import numpy as np

from ferlite import kernels
from ferlite.errors import ConfigError, InputError, ShapeError, TrainingError

BN_EPS = 1e-5
BN_MOMENTUM = 0.9  # running = momentum * running + (1 - momentum) * batch


def _as_float(*arrays):
    """Cast inputs to a common float32/float64 contiguous representation."""
    dtype = np.result_type(*arrays)
    if dtype not in (np.float32, np.float64):
        dtype = np.float32
    return [np.ascontiguousarray(a, dtype=dtype) for a in arrays]


def _batched(x, rank_one_name):
    """Accept [C,H,W] or [B,C,H,W]; return 4-d view plus a squeeze flag."""
    if x.ndim == 3:
        return x[None], True
    if x.ndim == 4:
        return x, False
    raise ShapeError(f"{rank_one_name} expects a 3-d or 4-d tensor, got rank {x.ndim}")


# ---------------------------------------------------------------------------
# convolution

def conv2d_forward(x, w, b):
    """Same-padded stride-1 correlation.

    x: [C_in,H,W] or [B,C_in,H,W]; w: [C_out,C_in,K,K] with K odd; b: [C_out].
    Returns a tensor with the same rank as x and unchanged spatial size.
    """
    x = np.asarray(x)
    x4, squeeze = _batched(x, "conv2d")
    x4, w, b = _as_float(x4, np.asarray(w), np.asarray(b))
    if w.ndim != 4 or w.shape[2] != w.shape[3]:
        raise ShapeError(f"kernels must be [C_out,C_in,K,K], got {w.shape}")
    if w.shape[2] % 2 != 1:
        raise ShapeError(f"kernel size must be odd, got {w.shape[2]}")
    if x4.shape[1] != w.shape[1]:
        raise ShapeError(
            f"input has {x4.shape[1]} channels but kernels expect {w.shape[1]}"
        )
    if b.shape != (w.shape[0],):
        raise ShapeError(f"bias shape {b.shape} does not match {w.shape[0]} kernels")
    out = kernels.conv2d_forward(x4, w, b)
    return out[0] if squeeze else out


def conv2d_backward(x, w, gy):
    """Gradients of conv2d_forward; returns dict with input/kernels/bias."""
    x = np.asarray(x)
    x4, squeeze = _batched(x, "conv2d")
    gy4, gsq = _batched(np.asarray(gy), "conv2d upstream")
    if squeeze != gsq:
        raise ShapeError("input and upstream gradient must have the same rank")
    x4, w, gy4 = _as_float(x4, np.asarray(w), gy4)
    expected = (x4.shape[0], w.shape[0], x4.shape[2], x4.shape[3])
    if gy4.shape != expected:
        raise ShapeError(f"upstream gradient shape {gy4.shape}, expected {expected}")
    if x4.shape[1] != w.shape[1]:
        raise ShapeError(
            f"input has {x4.shape[1]} channels but kernels expect {w.shape[1]}"
        )
    gx, gw, gb = kernels.conv2d_backward(x4, w, gy4)
    return {"input": gx[0] if squeeze else gx, "kernels": gw, "bias": gb}


# ---------------------------------------------------------------------------
# max pooling

def maxpool2x2_forward(x):
    """2x2/stride-2 max pool; returns (pooled, argmax indices for backward)."""
    x = np.asarray(x)
    x4, squeeze = _batched(x, "maxpool")
    if x4.shape[2] % 2 or x4.shape[3] % 2:
        raise ShapeError(f"maxpool2x2 needs even spatial dims, got {x4.shape[2:]}")
    (x4,) = _as_float(x4)
    out, idx = kernels.maxpool2_forward(x4)
    if squeeze:
        return out[0], idx[0]
    return out, idx


def maxpool2x2_backward(idx, gy):
    """Route upstream gradient to the recorded argmax positions."""
    idx = np.asarray(idx)
    idx4, squeeze = _batched(idx, "maxpool indices")
    gy4, gsq = _batched(np.asarray(gy), "maxpool upstream")
    if idx4.shape != gy4.shape:
        raise ShapeError(f"indices {idx4.shape} and upstream {gy4.shape} disagree")
    (gy4,) = _as_float(gy4)
    idx4 = np.ascontiguousarray(idx4, dtype=np.uint8)
    if idx4.max(initial=0) > 3:
        raise InputError("argmax index out of range; forward/backward mismatch")
    gx = kernels.maxpool2_backward(idx4, gy4)
    return gx[0] if squeeze else gx


# ---------------------------------------------------------------------------
# batch normalization (per channel over batch and spatial dims)

def batchnorm_forward(x, gamma, beta, running_mean=None, running_var=None,
                      mode="train", eps=BN_EPS, momentum=BN_MOMENTUM):
    """Standardize x [B,C,H,W] per channel.

    Train mode uses batch statistics and returns updated running stats in
    the cache; eval mode normalizes with the provided running stats.
    Returns (out, cache) where cache feeds batchnorm_backward (train) and
    carries the new running_mean/running_var.
    """
    x, gamma, beta = _as_float(np.asarray(x), np.asarray(gamma), np.asarray(beta))
    if x.ndim != 4:
        raise ShapeError(f"batchnorm expects [B,C,H,W], got rank {x.ndim}")
    c = x.shape[1]
    if gamma.shape != (c,) or beta.shape != (c,):
        raise ShapeError("gamma/beta must have one entry per channel")
    g = gamma.reshape(1, c, 1, 1)
    bt = beta.reshape(1, c, 1, 1)

    if mode == "train":
        n = x.shape[0] * x.shape[2] * x.shape[3]
        if n < 2:
            raise InputError("batchnorm train mode needs at least 2 values per channel")
        mean = x.mean(axis=(0, 2, 3))
        var = x.var(axis=(0, 2, 3))
        inv_std = 1.0 / np.sqrt(var + np.asarray(eps, dtype=x.dtype))
        xhat = (x - mean.reshape(1, c, 1, 1)) * inv_std.reshape(1, c, 1, 1)
        out = g * xhat + bt
        if running_mean is None:
            new_mean, new_var = mean, var
        else:
            new_mean = momentum * np.asarray(running_mean, dtype=x.dtype) + (1 - momentum) * mean
            new_var = momentum * np.asarray(running_var, dtype=x.dtype) + (1 - momentum) * var
        cache = {"mode": "train", "xhat": xhat, "inv_std": inv_std, "gamma": gamma,
                 "n": n, "running_mean": new_mean.astype(x.dtype),
                 "running_var": new_var.astype(x.dtype)}
        return out, cache

    if mode == "eval":
        if running_mean is None or running_var is None:
            raise ConfigError("batchnorm eval mode requires populated running stats")
        rm = np.asarray(running_mean, dtype=x.dtype).reshape(1, c, 1, 1)
        rv = np.asarray(running_var, dtype=x.dtype).reshape(1, c, 1, 1)
        inv_std = 1.0 / np.sqrt(rv + np.asarray(eps, dtype=x.dtype))
        xhat = (x - rm) * inv_std
        cache = {"mode": "eval", "xhat": xhat, "inv_std": inv_std, "gamma": gamma}
        return g * xhat + bt, cache

    raise ConfigError(f"batchnorm mode must be 'train' or 'eval', got {mode!r}")


def batchnorm_backward(cache, gy):
    """Gradients of batchnorm_forward; returns dict input/gamma/beta."""
    gy = np.asarray(gy)
    xhat = cache["xhat"]
    if gy.shape != xhat.shape:
        raise ShapeError(f"upstream shape {gy.shape} does not match {xhat.shape}")
    (gy,) = _as_float(gy)
    c = xhat.shape[1]
    gamma = cache["gamma"].reshape(1, c, 1, 1)
    dgamma = (gy * xhat).sum(axis=(0, 2, 3))
    dbeta = gy.sum(axis=(0, 2, 3))
    if cache["mode"] == "eval":
        # running stats are constants, so the chain is a plain affine map
        gx = gy * gamma * cache["inv_std"]
        return {"input": gx, "gamma": dgamma, "beta": dbeta}
    n = cache["n"]
    inv_std = cache["inv_std"].reshape(1, c, 1, 1)
    dxhat = gy * gamma
    gx = (inv_std / n) * (
        n * dxhat
        - dxhat.sum(axis=(0, 2, 3), keepdims=True)
        - xhat * (dxhat * xhat).sum(axis=(0, 2, 3), keepdims=True)
    )
    return {"input": gx, "gamma": dgamma, "beta": dbeta}


# ---------------------------------------------------------------------------
# activations

def relu(x):
    return np.maximum(np.asarray(x), 0)


def relu_backward(x, gy):
    x = np.asarray(x)
    return np.asarray(gy) * (x > 0)


def sigmoid(x):
    x = np.asarray(x)
    # evaluate on the negative half-line only, avoids exp overflow
    out = np.empty_like(x, dtype=x.dtype if x.dtype in (np.float32, np.float64) else np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def sigmoid_backward(y, gy):
    """Backward from the forward *output* y: dy/dx = y(1-y)."""
    y = np.asarray(y)
    return np.asarray(gy) * y * (1 - y)


# ---------------------------------------------------------------------------
# dense

def dense_forward(x, w, b):
    """x [B,n_in] (or [n_in]), w [n_out,n_in], b [n_out] -> x @ w.T + b."""
    x = np.asarray(x)
    squeeze = x.ndim == 1
    if squeeze:
        x = x[None]
    if x.ndim != 2 or np.asarray(w).ndim != 2:
        raise ShapeError("dense expects 2-d input and weights")
    x, w, b = _as_float(x, np.asarray(w), np.asarray(b))
    if x.shape[1] != w.shape[1]:
        raise ShapeError(f"input width {x.shape[1]} != weight fan-in {w.shape[1]}")
    if b.shape != (w.shape[0],):
        raise ShapeError(f"bias shape {b.shape} does not match {w.shape[0]} outputs")
    out = x @ w.T + b
    return out[0] if squeeze else out


def dense_backward(x, w, gy):
    x = np.asarray(x)
    gy = np.asarray(gy)
    if x.ndim == 1:
        x = x[None]
    if gy.ndim == 1:
        gy = gy[None]
    x, w, gy = _as_float(x, np.asarray(w), gy)
    if gy.shape != (x.shape[0], w.shape[0]):
        raise ShapeError(f"upstream shape {gy.shape}, expected {(x.shape[0], w.shape[0])}")
    return {"input": gy @ w, "weights": gy.T @ x, "bias": gy.sum(axis=0)}


# ---------------------------------------------------------------------------
# dropout (inverted: survivors scaled at train time, eval is identity)

def dropout(x, p, rng=None, mode="train"):
    """Returns (out, mask); mask is None in eval mode or when p == 0."""
    if not 0 <= p < 1:
        raise ConfigError(f"dropout probability must be in [0, 1), got {p}")
    x = np.asarray(x)
    if mode == "eval" or p == 0:
        return x, None
    if rng is None:
        raise ConfigError("dropout in train mode requires an rng")
    mask = rng.random(x.shape) >= p
    out = x * mask.astype(x.dtype) * x.dtype.type(1.0 / (1.0 - p))
    return out, mask


def dropout_backward(gy, mask, p):
    gy = np.asarray(gy)
    if mask is None:
        return gy
    return gy * mask.astype(gy.dtype) * gy.dtype.type(1.0 / (1.0 - p))


# ---------------------------------------------------------------------------
# loss

def softmax(logits):
    logits = np.asarray(logits)
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_cross_entropy(logits, labels):
    """Mean cross-entropy over the batch and its gradient w.r.t. logits.

    logits: [B,C]; labels: int array [B] with values in [0, C).
    Returns (loss, grad) with grad = (softmax - onehot) / B.
    """
    logits = np.asarray(logits)
    if logits.ndim != 2:
        raise ShapeError(f"logits must be [B,C], got rank {logits.ndim}")
    labels = np.asarray(labels)
    n, c = logits.shape
    if labels.shape != (n,):
        raise ShapeError(f"labels shape {labels.shape}, expected ({n},)")
    if labels.min(initial=0) < 0 or labels.max(initial=0) >= c:
        raise InputError(f"labels must lie in [0, {c})")
    z = logits - logits.max(axis=1, keepdims=True)
    logp = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    loss = float(-logp[np.arange(n), labels].mean())
    grad = np.exp(logp)
    grad[np.arange(n), labels] -= 1
    grad /= n
    return loss, grad.astype(logits.dtype)


# ---------------------------------------------------------------------------
# optimizer step

def sgd_step(params, grads, lr, frozen=()):
    """In-place param -= lr * grad for every parameter not named in frozen.

    params and grads are name -> array mappings with matching shapes.
    """
    if lr < 0:
        raise ConfigError(f"learning rate must be non-negative, got {lr}")
    for name, p in params.items():
        if name in frozen:
            continue
        g = grads[name]
        if g.shape != p.shape:
            raise ShapeError(f"gradient shape {g.shape} != param {name} {p.shape}")
        if not np.all(np.isfinite(g)):
            raise TrainingError(f"non-finite gradient in parameter {name!r}")
        p -= np.asarray(lr, dtype=p.dtype) * g.astype(p.dtype, copy=False)
