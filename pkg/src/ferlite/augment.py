"""Training-image augmentation: horizontal flip, rotation, brightness.

Applied on the fly per epoch in the order flip -> rotate -> brightness,
one seeded generator per (seed, epoch, sample) so results do not depend
on processing order.  All operations keep the 48x48 shape and the
uint8 0..255 range.
"""

from dataclasses import dataclass

import numpy as np

from ferlite.errors import ConfigError


@dataclass(frozen=True)
class AugmentConfig:
    rotation_degrees: float = 15.0       # uniform in [-r, +r]
    brightness_range: tuple = (0.6, 1.4)  # multiplicative factor
    flip_probability: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.rotation_degrees <= 45:
            raise ConfigError(f"rotation range must lie within [0, 45], got {self.rotation_degrees}")
        lo, hi = self.brightness_range
        if not (0 < lo <= hi):
            raise ConfigError(f"brightness factors must be positive and ordered, got {self.brightness_range}")
        if not 0 <= self.flip_probability <= 1:
            raise ConfigError(f"flip probability must be in [0, 1], got {self.flip_probability}")
        if self.seed < 0:
            raise ConfigError(f"seed must be non-negative, got {self.seed}")


def flip_horizontal(image):
    """Reverse column order."""
    return np.ascontiguousarray(np.asarray(image)[:, ::-1])


def rotate(image, degrees):
    """Rotate counterclockwise about the image center.

    Bilinear interpolation via inverse mapping; samples falling outside
    the frame read as 0, output is rounded and clamped to 0..255.
    degrees=0 is a bit-exact identity.
    """
    image = np.asarray(image)
    h, w = image.shape
    theta = np.deg2rad(degrees)
    c, s = np.cos(theta), np.sin(theta)
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    yy, xx = np.meshgrid(np.arange(h, dtype=np.float64),
                         np.arange(w, dtype=np.float64), indexing="ij")
    dx = xx - cx
    dy = yy - cy
    # screen coordinates (y down): inverse of a counterclockwise rotation
    sx = cx + c * dx - s * dy
    sy = cy + s * dx + c * dy

    x0 = np.floor(sx).astype(np.int64)
    y0 = np.floor(sy).astype(np.int64)
    fx = sx - x0
    fy = sy - y0

    def sample(yi, xi):
        inside = (yi >= 0) & (yi < h) & (xi >= 0) & (xi < w)
        vals = np.zeros(yi.shape, dtype=np.float64)
        vals[inside] = image[yi[inside], xi[inside]]
        return vals

    out = (
        sample(y0, x0) * (1 - fy) * (1 - fx)
        + sample(y0, x0 + 1) * (1 - fy) * fx
        + sample(y0 + 1, x0) * fy * (1 - fx)
        + sample(y0 + 1, x0 + 1) * fy * fx
    )
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def adjust_brightness(image, factor):
    """pixel <- clamp(round(pixel * factor), 0, 255); factor must be > 0."""
    if factor <= 0:
        raise ConfigError(f"brightness factor must be positive, got {factor}")
    scaled = np.rint(np.asarray(image, dtype=np.float64) * factor)
    return np.clip(scaled, 0, 255).astype(np.uint8)


def augment(image, cfg: AugmentConfig, rng):
    """Flip (with cfg probability), rotate, then adjust brightness.

    Three draws are consumed regardless of outcomes, so a given rng state
    always yields the same variant.
    """
    flip_draw = rng.random()
    degrees = rng.uniform(-cfg.rotation_degrees, cfg.rotation_degrees)
    factor = rng.uniform(*cfg.brightness_range)
    out = np.asarray(image)
    if flip_draw < cfg.flip_probability:
        out = flip_horizontal(out)
    if degrees != 0.0:
        out = rotate(out, degrees)
    if factor != 1.0:
        out = adjust_brightness(out, factor)
    return np.ascontiguousarray(out)
