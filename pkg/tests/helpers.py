"""Shared test utilities: finite-difference oracles and synthetic data."""

import numpy as np

from ferlite.dataset import LabeledImage


def rel_error(a, b):
    """Max absolute difference scaled by the larger magnitude."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    denom = max(np.abs(a).max(initial=0.0), np.abs(b).max(initial=0.0), 1e-8)
    return float(np.abs(a - b).max(initial=0.0) / denom)


def numeric_grad(f, x, eps=1e-5):
    """Central-difference gradient of scalar f at x (mutates x transiently)."""
    x = np.asarray(x, dtype=np.float64)
    grad = np.zeros_like(x)
    flat = x.ravel()
    gflat = grad.ravel()
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + eps
        fp = f(x)
        flat[i] = orig - eps
        fm = f(x)
        flat[i] = orig
        gflat[i] = (fp - fm) / (2.0 * eps)
    return grad


def synth_image(label, rng, noise=18.0):
    """A 48x48 face-like patch whose appearance depends on the label.

    Each class gets a bright blob at a class-specific position on a ring
    plus a class-oriented grating, with positional jitter and pixel
    noise, so a small CNN can learn the classes but not trivially.
    """
    yy, xx = np.meshgrid(np.arange(48, dtype=np.float64),
                         np.arange(48, dtype=np.float64), indexing="ij")
    angle = 2.0 * np.pi * label / 7.0
    cy = 24.0 + 13.0 * np.sin(angle) + rng.uniform(-2, 2)
    cx = 24.0 + 13.0 * np.cos(angle) + rng.uniform(-2, 2)
    blob = 150.0 * np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2 * 5.5 ** 2))
    theta = np.pi * label / 7.0
    grating = 35.0 * np.sin(2 * np.pi * (xx * np.cos(theta) + yy * np.sin(theta)) / 9.0)
    img = 60.0 + blob + grating + rng.normal(0.0, noise, size=(48, 48))
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def synth_dataset(n, seed=0, noise=18.0, usage="Training"):
    """n LabeledImage records with balanced random labels."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        label = i % 7
        out.append(LabeledImage(pixels=synth_image(label, rng, noise),
                                label=label, usage=usage))
    rng.shuffle(out)
    return out


def random_dataset(n, seed=0):
    """n uniformly random images with random labels (unlearnable)."""
    rng = np.random.default_rng(seed)
    return [
        LabeledImage(pixels=rng.integers(0, 256, size=(48, 48)).astype(np.uint8),
                     label=int(rng.integers(0, 7)), usage="Training")
        for _ in range(n)
    ]


def csv_row(label, pixels, usage="Training"):
    """One FER2013-format CSV line."""
    return f"{label},{' '.join(str(int(v)) for v in np.asarray(pixels).ravel())},{usage}"


def write_csv(path, images):
    lines = ["emotion,pixels,Usage"]
    lines += [csv_row(img.label, img.pixels, img.usage or "Training") for img in images]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
