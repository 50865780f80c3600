"""Denoising, resizing, and normalization."""

import numpy as np
import pytest

from ferlite.errors import InputError
from ferlite.imgproc import (Frame, gaussian3x3, normalize, prepare_frame,
                             resize_bilinear)


def noise(h=48, w=48, seed=0):
    return np.random.default_rng(seed).integers(0, 256, size=(h, w)).astype(np.uint8)


# --- gaussian3x3 -----------------------------------------------------------------

def test_gaussian_impulse_response():
    img = np.zeros((9, 9), np.uint8)
    img[4, 4] = 16
    out = gaussian3x3(img)
    # kernel weights 1-2-1 / 2-4-2 / 1-2-1 over 16: the impulse spreads as
    # 4 at the center, 2 at the edge neighbours, 1 at the diagonals
    assert out[4, 4] == 4
    assert out[4, 3] == out[4, 5] == out[3, 4] == out[5, 4] == 2
    assert out[3, 3] == out[3, 5] == out[5, 3] == out[5, 5] == 1
    assert out[4, 6] == 0 and out[6, 4] == 0
    assert int(out.sum()) == 16


def test_gaussian_constant_is_fixed_point():
    for value in (0, 1, 128, 254, 255):
        img = np.full((12, 17), value, np.uint8)
        assert np.array_equal(gaussian3x3(img), img)


def test_gaussian_rounds_half_up():
    # single pixel of 8 at the center: center term is 8*4 = 32 -> 2 exactly,
    # diagonals are 8*1 = 8 -> (8 + 8) >> 4 = 1 (0.5 rounded up)
    img = np.zeros((5, 5), np.uint8)
    img[2, 2] = 8
    out = gaussian3x3(img)
    assert out[2, 2] == 2
    assert out[1, 1] == 1


def test_gaussian_commutes_with_horizontal_flip():
    img = noise()
    a = gaussian3x3(img[:, ::-1].copy())
    b = gaussian3x3(img)[:, ::-1]
    assert np.array_equal(a, b)


def test_gaussian_commutes_with_vertical_flip():
    img = noise(seed=5)
    a = gaussian3x3(img[::-1].copy())
    b = gaussian3x3(img)[::-1]
    assert np.array_equal(a, b)


def test_gaussian_reduces_noise_variance():
    img = noise(64, 64, seed=2)
    out = gaussian3x3(img)
    assert out.astype(np.float64).var() < 0.5 * img.astype(np.float64).var()


def test_gaussian_edge_replication():
    # a bright first row bleeds into row 1, but replication keeps row 0 bright:
    # row 0 sees weights (1+2+1 + 2+4+2) * 255 / 16 = 12 * 255 / 16
    img = np.zeros((6, 6), np.uint8)
    img[0, :] = 255
    out = gaussian3x3(img)
    assert int(out[0, 2]) == (12 * 255 + 8) >> 4
    assert int(out[1, 2]) == (4 * 255 + 8) >> 4
    assert np.all(out[3:] == 0)


def test_gaussian_input_contract():
    with pytest.raises(InputError):
        gaussian3x3(np.zeros((4, 4), np.float32))
    with pytest.raises(InputError):
        gaussian3x3(np.zeros((4, 4, 1), np.uint8))


# --- resize_bilinear ---------------------------------------------------------

def test_resize_same_size_is_identity():
    img = noise()
    assert np.array_equal(resize_bilinear(img, 48, 48), img)


def test_resize_constant_any_scale():
    img = np.full((96, 96), 77, np.uint8)
    assert np.all(resize_bilinear(img, 48, 48) == 77)
    assert np.all(resize_bilinear(img, 13, 31) == 77)


def test_resize_corners_align():
    img = noise(31, 57, seed=3)
    out = resize_bilinear(img, 48, 48)
    assert out[0, 0] == img[0, 0]
    assert out[0, 47] == img[0, 56]
    assert out[47, 0] == img[30, 0]
    assert out[47, 47] == img[30, 56]


def test_resize_2x2_to_3x3_hand_weights():
    img = np.array([[0, 100], [200, 40]], np.uint8)
    out = resize_bilinear(img, 3, 3)
    # midpoints interpolate with weight 1/2, the center with 1/4 each
    assert out[0, 1] == 50
    assert out[1, 0] == 100
    assert out[1, 2] == 70
    assert out[2, 1] == 120
    assert out[1, 1] == round((0 + 100 + 200 + 40) / 4)
    # corners are exact
    assert out[0, 0] == 0 and out[0, 2] == 100
    assert out[2, 0] == 200 and out[2, 2] == 40


def test_resize_downscale_axis_midpoint():
    # 3 -> 2 along one axis: output column 1 reads source coordinate 2 exactly
    img = np.array([[10, 20, 90]], np.uint8).repeat(2, axis=0)
    out = resize_bilinear(img, 2, 2)
    assert np.array_equal(out, np.array([[10, 90], [10, 90]], np.uint8))


def test_resize_1x1_target_reads_corner():
    img = noise(8, 8, seed=4)
    assert resize_bilinear(img, 1, 1)[0, 0] == img[0, 0]


def test_resize_contract_errors():
    with pytest.raises(InputError):
        resize_bilinear(np.zeros((1, 5), np.uint8), 4, 4)
    with pytest.raises(InputError):
        resize_bilinear(np.zeros((5, 5), np.uint8), 0, 4)
    with pytest.raises(InputError):
        resize_bilinear(np.zeros((5, 5), np.int32), 4, 4)


# --- normalize / Frame / prepare_frame -----------------------------------------

def test_normalize_values_and_shape():
    img = np.full((48, 48), 255, np.uint8)
    img[0, 0] = 0
    img[0, 1] = 128
    x = normalize(img)
    assert x.shape == (1, 48, 48)
    assert x.dtype == np.float32
    assert x[0, 0, 0] == 0.0
    assert x[0, 0, 1] == np.float32(128) / np.float32(255)
    assert x[0, 47, 47] == 1.0


def test_normalize_rejects_wrong_shape():
    with pytest.raises(InputError):
        normalize(np.zeros((47, 48), np.uint8))
    with pytest.raises(InputError):
        normalize(np.zeros((48, 48), np.float32))


def test_frame_validation():
    Frame(pixels=np.zeros((2, 2), np.uint8), index=0)
    with pytest.raises(InputError):
        Frame(pixels=np.zeros((2, 2), np.int16))
    with pytest.raises(InputError):
        Frame(pixels=np.zeros((0, 2), np.uint8))
    with pytest.raises(InputError):
        Frame(pixels=[[1, 2], [3, 4]])


def test_prepare_frame_denoised_native_comparison():
    img = noise(96, 96, seed=6)
    compare, model_in = prepare_frame(Frame(pixels=img, index=0))
    assert compare.shape == (96, 96)
    assert np.array_equal(compare, gaussian3x3(img))
    assert model_in.shape == (1, 48, 48)
    expected = normalize(resize_bilinear(gaussian3x3(img), 48, 48))
    assert np.array_equal(model_in, expected)


def test_prepare_frame_no_denoise_48_passthrough():
    img = noise(seed=7)
    compare, model_in = prepare_frame(Frame(pixels=img, index=3), denoise=False)
    assert compare is img
    assert np.array_equal(model_in, normalize(img))
