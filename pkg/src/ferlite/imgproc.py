"""Grayscale frame utilities for the streaming pipeline.

Integer 3x3 Gaussian smoothing, bilinear resize to the network input
size, and float normalization.  Everything operates on uint8 arrays in
row-major order.
"""

from dataclasses import dataclass

import numpy as np

from ferlite.errors import InputError

# 3x3 binomial kernel, weights sum to 16:
#   1 2 1
#   2 4 2
#   1 2 1
_GAUSS_WEIGHTS = ((1, 2, 1), (2, 4, 2), (1, 2, 1))


@dataclass(frozen=True)
class Frame:
    """One grayscale frame plus its position in the stream."""

    pixels: np.ndarray  # uint8 [H, W]
    index: int = 0

    def __post_init__(self):
        p = self.pixels
        if not isinstance(p, np.ndarray) or p.ndim != 2 or p.dtype != np.uint8:
            raise InputError("frame pixels must be a 2-d uint8 array")
        if p.shape[0] < 1 or p.shape[1] < 1:
            raise InputError(f"frame must be non-empty, got shape {p.shape}")


def gaussian3x3(image):
    """Smooth with the 3x3 binomial kernel using integer arithmetic.

    out = (weighted sum + 8) >> 4, i.e. round-half-up of sum/16.  The
    border is handled by edge replication, so a constant image is a
    fixed point.
    """
    image = np.asarray(image)
    if image.ndim != 2 or image.dtype != np.uint8:
        raise InputError("gaussian3x3 expects a 2-d uint8 image")
    padded = np.pad(image, 1, mode="edge").astype(np.int32)
    h, w = image.shape
    acc = np.zeros((h, w), dtype=np.int32)
    for dy in range(3):
        for dx in range(3):
            acc += _GAUSS_WEIGHTS[dy][dx] * padded[dy:dy + h, dx:dx + w]
    return ((acc + 8) >> 4).astype(np.uint8)


def resize_bilinear(image, out_h, out_w):
    """Resize with corner-aligned bilinear interpolation.

    Source coordinate of output pixel i is i * (S - 1) / (D - 1), so the
    four corners map exactly.  The source must be at least 2x2 and the
    target at least 1x1; a 1-pixel target reads the top-left corner.
    """
    image = np.asarray(image)
    if image.ndim != 2 or image.dtype != np.uint8:
        raise InputError("resize_bilinear expects a 2-d uint8 image")
    in_h, in_w = image.shape
    if in_h < 2 or in_w < 2:
        raise InputError(f"source must be at least 2x2, got {in_h}x{in_w}")
    if out_h < 1 or out_w < 1:
        raise InputError(f"target size must be positive, got {out_h}x{out_w}")

    def axis_coords(n_out, n_in):
        if n_out == 1:
            return np.zeros(1, dtype=np.float64)
        return np.arange(n_out, dtype=np.float64) * (n_in - 1) / (n_out - 1)

    sy = axis_coords(out_h, in_h)
    sx = axis_coords(out_w, in_w)
    y0 = np.minimum(np.floor(sy).astype(np.int64), in_h - 2)
    x0 = np.minimum(np.floor(sx).astype(np.int64), in_w - 2)
    fy = (sy - y0)[:, None]
    fx = (sx - x0)[None, :]

    img = image.astype(np.float64)
    tl = img[np.ix_(y0, x0)]
    tr = img[np.ix_(y0, x0 + 1)]
    bl = img[np.ix_(y0 + 1, x0)]
    br = img[np.ix_(y0 + 1, x0 + 1)]
    out = (tl * (1 - fy) * (1 - fx) + tr * (1 - fy) * fx
           + bl * fy * (1 - fx) + br * fy * fx)
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def normalize(image):
    """uint8 [48, 48] -> float32 [1, 48, 48] scaled to [0, 1]."""
    image = np.asarray(image)
    if image.shape != (48, 48) or image.dtype != np.uint8:
        raise InputError(f"expected a 48x48 uint8 image, got {image.dtype} {image.shape}")
    return (image.astype(np.float32) / np.float32(255.0))[None, :, :]


def prepare_frame(frame: Frame, denoise=True):
    """Optionally denoise, then build the network input.

    Returns (compare_pixels, model_input).  compare_pixels is the
    (denoised) frame at native resolution; scene-change comparison runs
    on it so thresholds can scale with frame area.  model_input is the
    float32 [1, 48, 48] tensor, resized first if the frame is not
    already 48x48.
    """
    pixels = gaussian3x3(frame.pixels) if denoise else frame.pixels
    scaled = pixels if pixels.shape == (48, 48) else resize_bilinear(pixels, 48, 48)
    return pixels, normalize(scaled)
