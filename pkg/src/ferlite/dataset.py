"""FER2013-format CSV ingestion and deterministic splitting.

The CSV carries a header "emotion,pixels,Usage"; each data row is an
emotion index in 0..6, 2304 space-separated pixel values in 0..255
(a 48x48 grayscale image, row-major), and a usage tag.  The usage tag is
preserved but ignored unless the caller opts into the file's own split.
"""

from dataclasses import dataclass

import numpy as np

from ferlite import rng as _rng
from ferlite.errors import ConfigError, CsvParseError, DataError, InputError
from ferlite.labels import NUM_CLASSES

IMAGE_SIZE = 48
PIXELS_PER_IMAGE = IMAGE_SIZE * IMAGE_SIZE
CSV_HEADER = "emotion,pixels,Usage"


@dataclass
class LabeledImage:
    pixels: np.ndarray  # uint8 [48,48]
    label: int
    usage: str = ""

    def as_input(self) -> np.ndarray:
        """float32 [1,48,48] scaled to [0,1] for the model."""
        return (self.pixels.astype(np.float32) / 255.0)[None]


@dataclass
class SplitDataset:
    train: list
    validate: list
    test: list
    seed: int = 0


def _parse_row(line, line_no):
    parts = line.split(",")
    if len(parts) != 3:
        raise CsvParseError(f"line {line_no}: expected 3 fields, got {len(parts)}")
    label_text, pixel_text, usage = parts
    try:
        label = int(label_text)
    except ValueError:
        raise CsvParseError(f"line {line_no}: non-integer emotion {label_text!r}") from None
    if not 0 <= label < NUM_CLASSES:
        raise CsvParseError(f"line {line_no}: emotion {label} outside [0, {NUM_CLASSES})")
    tokens = pixel_text.split()
    if len(tokens) != PIXELS_PER_IMAGE:
        raise CsvParseError(
            f"line {line_no}: expected {PIXELS_PER_IMAGE} pixels, got {len(tokens)}")
    try:
        flat = np.array(tokens, dtype=np.int64)
    except ValueError:
        raise CsvParseError(f"line {line_no}: non-integer pixel value") from None
    if flat.min() < 0 or flat.max() > 255:
        raise CsvParseError(f"line {line_no}: pixel value outside [0, 255]")
    pixels = flat.astype(np.uint8).reshape(IMAGE_SIZE, IMAGE_SIZE)
    return LabeledImage(pixels=pixels, label=label, usage=usage.strip())


def load_fer_csv(path):
    """Parse a FER2013-format CSV into LabeledImage records."""
    try:
        f = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    with f:
        header = f.readline().strip()
        if header != CSV_HEADER:
            raise CsvParseError(
                f"{path}: missing or wrong header; expected {CSV_HEADER!r}, got {header!r}")
        images = []
        for line_no, line in enumerate(f, start=2):
            line = line.strip()
            if not line:
                continue
            images.append(_parse_row(line, line_no))
    return images


def save_fer_csv(images, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(CSV_HEADER + "\n")
        for img in images:
            pixel_text = " ".join(str(int(v)) for v in img.pixels.ravel())
            f.write(f"{img.label},{pixel_text},{img.usage}\n")


def split(data, ratios=(8, 1, 1), seed=0) -> SplitDataset:
    """Seeded shuffle then contiguous slices.

    Sizes are floor(N*r1/S) and floor(N*r2/S) for train/validate; the
    remainder goes to test.  Deterministic for a fixed seed.
    """
    if len(ratios) != 3 or any(r <= 0 for r in ratios):
        raise ConfigError(f"split ratios must be 3 positive numbers, got {ratios}")
    n = len(data)
    if n < 10:
        raise InputError(f"need at least 10 samples to split, got {n}")
    order = _rng.make_rng(seed, _rng.SPLIT).permutation(n)
    total = sum(ratios)
    n_train = int(n * ratios[0] / total)
    n_val = int(n * ratios[1] / total)
    shuffled = [data[i] for i in order]
    return SplitDataset(
        train=shuffled[:n_train],
        validate=shuffled[n_train:n_train + n_val],
        test=shuffled[n_train + n_val:],
        seed=seed,
    )


def split_by_usage(data) -> SplitDataset:
    """Use the CSV's own usage column: Training / PublicTest / PrivateTest."""
    groups = {"Training": [], "PublicTest": [], "PrivateTest": []}
    for img in data:
        if img.usage not in groups:
            raise InputError(
                f"unknown usage tag {img.usage!r}; expected one of {sorted(groups)}")
        groups[img.usage].append(img)
    return SplitDataset(
        train=groups["Training"],
        validate=groups["PublicTest"],
        test=groups["PrivateTest"],
        seed=-1,
    )
