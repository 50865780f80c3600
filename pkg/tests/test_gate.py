"""SAD scene-change gating over frame streams."""

import numpy as np
import pytest

from ferlite.errors import DataError, InputError
from ferlite.gate import (DEFAULT_TAU, GateState, classify_scene,
                          default_threshold, format_stream_report,
                          gated_predict, run_stream, sad)
from ferlite.imgproc import Frame, gaussian3x3
from ferlite.labels import EMOTIONS


def frame(pixels, index=0):
    return Frame(pixels=np.asarray(pixels, dtype=np.uint8), index=index)


def const_frames(values, size=16):
    return [frame(np.full((size, size), v, np.uint8), index=i)
            for i, v in enumerate(values)]


class CountingModel:
    """Returns a fixed label sequence and counts invocations."""

    def __init__(self, labels=(0,)):
        self.labels = list(labels)
        self.calls = 0

    def __call__(self, x):
        assert x.shape == (1, 48, 48) and x.dtype == np.float32
        label = self.labels[self.calls % len(self.labels)]
        self.calls += 1
        return label


# --- sad ---------------------------------------------------------------

def test_sad_hand_case():
    a = np.array([[1, 2], [3, 4]], np.uint8)
    b = np.array([[0, 2], [5, 4]], np.uint8)
    assert sad(a, b) == 3


def test_sad_is_symmetric_and_exact():
    rng = np.random.default_rng(0)
    for _ in range(20):
        a = rng.integers(0, 256, size=(12, 9)).astype(np.uint8)
        b = rng.integers(0, 256, size=(12, 9)).astype(np.uint8)
        v = sad(a, b)
        assert v == sad(b, a)
        assert v == int(np.abs(a.astype(int) - b.astype(int)).sum())
        assert isinstance(v, int)


def test_sad_extreme_no_overflow():
    a = np.zeros((480, 640), np.uint8)
    b = np.full((480, 640), 255, np.uint8)
    assert sad(a, b) == 255 * 480 * 640


def test_sad_contract():
    with pytest.raises(InputError):
        sad(np.zeros((2, 2), np.uint8), np.zeros((2, 3), np.uint8))
    with pytest.raises(InputError):
        sad(np.zeros((2, 2), np.int32), np.zeros((2, 2), np.uint8))


# --- threshold and classification -----------------------------------------------

def test_classify_is_strictly_greater():
    assert classify_scene(5, 4) is True
    assert classify_scene(4, 4) is False
    assert classify_scene(0, 0) is False


def test_default_threshold_scales_with_area():
    assert default_threshold(48, 48) == DEFAULT_TAU * 48 * 48
    assert default_threshold(10, 20, tau=2.5) == 2.5 * 200
    with pytest.raises(InputError):
        default_threshold(0, 48)
    with pytest.raises(InputError):
        default_threshold(48, 48, tau=-1)


# --- streams -----------------------------------------------------------------

def test_identical_frames_invoke_once():
    frames = const_frames([90] * 12, size=48)
    model = CountingModel([4])
    records, state = run_stream(frames, model, denoise=False)
    assert model.calls == 1
    assert state.invocations == 1
    assert state.frames_seen == 12
    assert records[0].invoked and records[0].sad_value is None
    assert all(not r.invoked for r in records[1:])
    assert all(r.sad_value == 0 for r in records[1:])
    assert all(r.label == 4 for r in records)


def test_big_jumps_invoke_every_frame():
    frames = const_frames([0, 200, 0, 200, 0], size=16)
    model = CountingModel([0, 1, 2, 3, 4])
    records, state = run_stream(frames, model, threshold=0, denoise=False)
    assert model.calls == 5
    assert [r.label for r in records] == [0, 1, 2, 3, 4]
    assert all(r.invoked for r in records)
    # each jump is |200 - 0| per pixel
    assert all(r.sad_value == 200 * 16 * 16 for r in records[1:])


def test_static_frames_reuse_last_label():
    frames = const_frames([0, 0, 250, 250, 250], size=16)
    model = CountingModel([6, 2])
    records, state = run_stream(frames, model, denoise=False)
    assert model.calls == 2
    assert [r.label for r in records] == [6, 6, 2, 2, 2]
    assert [r.invoked for r in records] == [True, False, True, False, False]
    assert state.last_label == 2


def test_invocations_invariant_random_streams():
    rng = np.random.default_rng(3)
    for trial in range(10):
        frames = [frame(rng.integers(0, 256, size=(8, 8)).astype(np.uint8), index=i)
                  for i in range(20)]
        thr = float(rng.uniform(0, 8 * 8 * 128))
        records, state = run_stream(frames, CountingModel([1]),
                                    threshold=thr, denoise=False)
        expected = 1 + sum(1 for r in records[1:] if r.sad_value > thr)
        assert state.invocations == expected
        assert sum(r.invoked for r in records) == expected
        assert state.frames_seen == 20


def test_infinite_threshold_only_first_frame():
    rng = np.random.default_rng(4)
    frames = [frame(rng.integers(0, 256, size=(8, 8)).astype(np.uint8), index=i)
              for i in range(15)]
    model = CountingModel([3])
    records, _ = run_stream(frames, model, threshold=float("inf"), denoise=False)
    assert model.calls == 1
    assert all(r.label == 3 for r in records)


def test_sad_runs_on_denoised_frames():
    a = np.zeros((48, 48), np.uint8)
    b = np.zeros((48, 48), np.uint8)
    b[10, 10] = 255  # smoothing spreads the impulse, changing the SAD
    records, _ = run_stream([frame(a, 0), frame(b, 1)], CountingModel([0]),
                            threshold=0, denoise=True)
    assert records[1].sad_value == sad(gaussian3x3(a), gaussian3x3(b))
    assert records[1].sad_value != sad(a, b)


def test_derived_threshold_uses_frame_area():
    # per-pixel drift of 3 < tau=4 stays static; 5 > 4 is a change
    frames = const_frames([100, 103, 108], size=32)
    records, state = run_stream(frames, CountingModel([2]), denoise=False)
    assert state.threshold == DEFAULT_TAU * 32 * 32
    assert [r.invoked for r in records] == [True, False, True]


def test_model_error_advances_frame_counter_only():
    state = GateState(threshold=0.0, denoise=False)

    def boom(x):
        raise RuntimeError("model exploded")

    with pytest.raises(RuntimeError):
        gated_predict(state, const_frames([7], size=48)[0], boom)
    assert state.frames_seen == 1
    assert state.invocations == 0
    assert state.prev_pixels is None
    assert state.last_label is None
    # the same frame can be retried with a working model
    rec = gated_predict(state, const_frames([7], size=48)[0], CountingModel([5]))
    assert rec.invoked and rec.label == 5
    assert state.frames_seen == 2
    assert state.invocations == 1


def test_empty_stream_rejected():
    with pytest.raises(DataError):
        run_stream([], CountingModel())


# --- report format ----------------------------------------------------------------

def test_report_layout():
    frames = const_frames([10, 10, 200, 200], size=16)
    records, _ = run_stream(frames, CountingModel([3, 5]), denoise=False)
    text = format_stream_report(records)
    lines = text.splitlines()
    assert lines[0] == "t,sad,scene_type,label_name,model_invoked"
    assert lines[1] == "0,,1,Happy,1"
    assert lines[2] == f"1,0,0,{EMOTIONS[3]},0"
    assert lines[3] == f"2,{190 * 16 * 16},1,Surprise,1"
    assert lines[4] == "3,0,0,Surprise,0"
    assert lines[5] == "# invoked 2 of 4 frames (ratio 0.5000)"
    assert text.endswith("\n")


def test_report_ratio_formatting():
    frames = const_frames([0, 0, 0], size=8)
    records, _ = run_stream(frames, CountingModel([0]), denoise=False)
    text = format_stream_report(records)
    assert text.splitlines()[-1] == "# invoked 1 of 3 frames (ratio 0.3333)"
