"""Binary PGM (P5) reading and writing for simulated frame streams.

Only 8-bit binary PGM is supported: magic P5, whitespace-separated
width/height/maxval with optional # comments, maxval exactly 255, then
one whitespace byte and width*height raw pixel bytes.
"""

import os

import numpy as np

from ferlite.errors import DataError, PgmError
from ferlite.imgproc import Frame


def _header_tokens(data, path):
    """Yield (token, next_offset) for the three numeric header fields."""
    pos = 0
    n = len(data)
    found = []
    while len(found) < 3:
        while pos < n and data[pos:pos + 1].isspace():
            pos += 1
        if pos < n and data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        if pos == start:
            raise PgmError(f"{path}: truncated header")
        found.append(data[start:pos])
    return found, pos


def read_pgm(path):
    """Load a binary PGM file into a uint8 [H, W] array."""
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if data[:2] != b"P5":
        raise PgmError(f"{path}: not a binary PGM (expected magic P5)")
    after_magic = data[2:3]
    if not (after_magic.isspace() or after_magic == b"#"):
        raise PgmError(f"{path}: malformed header after magic")
    (w_tok, h_tok, max_tok), pos = _header_tokens(data[2:], path)
    pos += 2
    try:
        width, height, maxval = int(w_tok), int(h_tok), int(max_tok)
    except ValueError:
        raise PgmError(f"{path}: non-numeric header field") from None
    if width < 1 or height < 1:
        raise PgmError(f"{path}: invalid dimensions {width}x{height}")
    if maxval != 255:
        raise PgmError(f"{path}: unsupported maxval {maxval} (only 255)")
    if pos >= len(data) or not data[pos:pos + 1].isspace():
        raise PgmError(f"{path}: missing whitespace before pixel data")
    pos += 1
    pixels = data[pos:pos + width * height]
    if len(pixels) != width * height:
        raise PgmError(f"{path}: expected {width * height} pixel bytes, found {len(pixels)}")
    return np.frombuffer(pixels, dtype=np.uint8).reshape(height, width).copy()


def write_pgm(path, image):
    """Write a uint8 [H, W] array as binary PGM."""
    image = np.asarray(image)
    if image.ndim != 2 or image.dtype != np.uint8:
        raise PgmError(f"{path}: can only write 2-d uint8 images")
    h, w = image.shape
    header = f"P5\n{w} {h}\n255\n".encode("ascii")
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(np.ascontiguousarray(image).tobytes())
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc}") from exc


def list_frames(directory):
    """Load every .pgm file in a directory, sorted by file name.

    Frame indices follow the sorted order so runs are reproducible
    regardless of filesystem listing order.
    """
    try:
        names = sorted(n for n in os.listdir(directory) if n.lower().endswith(".pgm"))
    except OSError as exc:
        raise DataError(f"cannot list {directory}: {exc}") from exc
    if not names:
        raise DataError(f"no .pgm frames found in {directory}")
    frames = []
    for i, name in enumerate(names):
        pixels = read_pgm(os.path.join(directory, name))
        if frames and pixels.shape != frames[0].pixels.shape:
            raise PgmError(
                f"{os.path.join(directory, name)}: frame size {pixels.shape} "
                f"differs from first frame {frames[0].pixels.shape}"
            )
        frames.append(Frame(pixels=pixels, index=i))
    return frames
