"""Binary PGM reader/writer and frame directory loading."""

import numpy as np
import pytest

from ferlite.errors import DataError, PgmError
from ferlite.pgm import list_frames, read_pgm, write_pgm


def image(h=6, w=7, seed=0):
    return np.random.default_rng(seed).integers(0, 256, size=(h, w)).astype(np.uint8)


def test_round_trip_exact(tmp_path):
    img = image(13, 9)
    p = tmp_path / "f.pgm"
    write_pgm(p, img)
    back = read_pgm(p)
    assert back.dtype == np.uint8
    assert np.array_equal(back, img)
    assert back.flags.writeable


def test_written_header_layout(tmp_path):
    p = tmp_path / "f.pgm"
    write_pgm(p, np.zeros((2, 3), np.uint8))
    assert p.read_bytes() == b"P5\n3 2\n255\n" + b"\x00" * 6


def test_reader_accepts_comments_everywhere(tmp_path):
    body = bytes(range(6))
    raw = b"P5 # magic\n# a full comment line\n3 # width\n 2\n# before maxval\n255\n" + body
    p = tmp_path / "c.pgm"
    p.write_bytes(raw)
    out = read_pgm(p)
    assert np.array_equal(out, np.frombuffer(body, np.uint8).reshape(2, 3))


def test_reader_accepts_comment_touching_magic(tmp_path):
    p = tmp_path / "c.pgm"
    p.write_bytes(b"P5# glued comment\n2 2 255\n" + b"\x01\x02\x03\x04")
    assert np.array_equal(read_pgm(p), np.array([[1, 2], [3, 4]], np.uint8))


def test_reader_tolerates_trailing_bytes(tmp_path):
    # many writers end the file with a newline after the raster
    p = tmp_path / "t.pgm"
    p.write_bytes(b"P5\n2 2\n255\n" + bytes([9, 8, 7, 6]) + b"\n")
    assert np.array_equal(read_pgm(p), np.array([[9, 8], [7, 6]], np.uint8))


@pytest.mark.parametrize("raw,fragment", [
    (b"P2\n2 2\n255\n1 2 3 4", "magic"),
    (b"P5\n2 2\n65535\n" + b"\x00" * 4, "maxval"),
    (b"P5\n2 2\n255\n\x00\x00\x00", "pixel bytes"),
    (b"P5\nw 2\n255\n" + b"\x00" * 4, "non-numeric"),
    (b"P5\n2", "truncated header"),
    (b"P5\n0 2\n255\n", "dimensions"),
    (b"P5\n2 2 255", "whitespace"),
    (b"P5x2 2\n255\n" + b"\x00" * 4, "malformed header"),
])
def test_malformed_files_raise_and_name_the_file(tmp_path, raw, fragment):
    p = tmp_path / "bad.pgm"
    p.write_bytes(raw)
    with pytest.raises(PgmError) as err:
        read_pgm(p)
    assert fragment in str(err.value)
    assert "bad.pgm" in str(err.value)


def test_missing_file_is_data_error(tmp_path):
    with pytest.raises(DataError) as err:
        read_pgm(tmp_path / "absent.pgm")
    assert "absent.pgm" in str(err.value)


def test_write_rejects_non_uint8(tmp_path):
    with pytest.raises(PgmError):
        write_pgm(tmp_path / "x.pgm", np.zeros((2, 2), np.float32))
    with pytest.raises(PgmError):
        write_pgm(tmp_path / "x.pgm", np.zeros((2, 2, 1), np.uint8))


def test_write_unwritable_path(tmp_path):
    with pytest.raises(DataError):
        write_pgm(tmp_path / "no" / "dir" / "x.pgm", np.zeros((2, 2), np.uint8))


# --- list_frames ---------------------------------------------------------------

def test_list_frames_sorted_with_indices(tmp_path):
    for name, fill in (("c.pgm", 3), ("a.pgm", 1), ("b.PGM", 2)):
        write_pgm(tmp_path / name, np.full((4, 5), fill, np.uint8))
    (tmp_path / "notes.txt").write_text("ignored")
    frames = list_frames(tmp_path)
    assert [f.index for f in frames] == [0, 1, 2]
    # case-insensitive extension match, lexicographic name order
    assert [int(f.pixels[0, 0]) for f in frames] == [1, 2, 3]
    assert all(f.pixels.shape == (4, 5) for f in frames)


def test_list_frames_shape_mismatch(tmp_path):
    write_pgm(tmp_path / "0.pgm", np.zeros((4, 4), np.uint8))
    write_pgm(tmp_path / "1.pgm", np.zeros((4, 5), np.uint8))
    with pytest.raises(PgmError) as err:
        list_frames(tmp_path)
    assert "1.pgm" in str(err.value)


def test_list_frames_empty_dir(tmp_path):
    with pytest.raises(DataError):
        list_frames(tmp_path)


def test_list_frames_missing_dir(tmp_path):
    with pytest.raises(DataError):
        list_frames(tmp_path / "nope")
