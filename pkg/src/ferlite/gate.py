"""Scene-change gating for frame streams.

Consecutive denoised frames are compared by sum of absolute differences
(SAD).  The classifier only runs when SAD exceeds a threshold; otherwise
the previous label is reused.  The first frame of a stream always runs
the classifier.
"""

import io
from dataclasses import dataclass, field

import numpy as np

from ferlite.errors import DataError, InputError
from ferlite.imgproc import Frame, prepare_frame
from ferlite.labels import label_name

DEFAULT_TAU = 4.0  # default threshold is tau * width * height


def sad(a, b):
    """Exact sum of absolute pixel differences between two uint8 frames."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise InputError(f"frame shapes differ: {a.shape} vs {b.shape}")
    if a.dtype != np.uint8 or b.dtype != np.uint8:
        raise InputError("sad expects uint8 frames")
    diff = np.abs(a.astype(np.int64) - b.astype(np.int64))
    return int(diff.sum())


def classify_scene(sad_value, threshold):
    """True when the frame starts a new scene: SAD strictly above threshold."""
    return sad_value > threshold


def default_threshold(height, width, tau=DEFAULT_TAU):
    """Threshold scaled to frame area: tau * width * height."""
    if height < 1 or width < 1:
        raise InputError(f"invalid frame size {height}x{width}")
    if tau < 0:
        raise InputError(f"tau must be non-negative, got {tau}")
    return tau * width * height


@dataclass
class GateState:
    """Mutable gate state carried between frames."""

    threshold: float
    denoise: bool = True
    prev_pixels: np.ndarray = None  # denoised previous frame, native size
    last_label: int = None
    frames_seen: int = 0
    invocations: int = 0


@dataclass(frozen=True)
class StreamRecord:
    """Per-frame outcome of a gated run."""

    t: int
    sad_value: int  # None on the first frame
    scene_change: bool
    label: int
    invoked: bool


def gated_predict(state: GateState, frame: Frame, model_fn):
    """Process one frame through the gate; returns a StreamRecord.

    model_fn maps a float32 [1, 48, 48] input to a label index.  If the
    model call raises, the error propagates; the frame counter still
    advances but comparison state and counters are left untouched, so
    the gate invariants keep holding.
    """
    compare, model_input = prepare_frame(frame, denoise=state.denoise)
    if state.prev_pixels is None:
        sad_value = None
        scene_change = True
    else:
        sad_value = sad(compare, state.prev_pixels)
        scene_change = classify_scene(sad_value, state.threshold)

    if scene_change:
        try:
            label = int(model_fn(model_input))
        except Exception:
            state.frames_seen += 1
            raise
    else:
        label = state.last_label

    state.prev_pixels = compare
    state.last_label = label
    state.frames_seen += 1
    if scene_change:
        state.invocations += 1
    return StreamRecord(t=frame.index, sad_value=sad_value,
                        scene_change=scene_change, label=label,
                        invoked=scene_change)


def run_stream(frames, model_fn, threshold=None, tau=DEFAULT_TAU, denoise=True):
    """Run the gate over a frame sequence; returns the list of records.

    threshold=None derives tau * width * height from the first frame.
    """
    if not frames:
        raise DataError("empty frame stream")
    if threshold is None:
        h, w = frames[0].pixels.shape
        threshold = default_threshold(h, w, tau)
    state = GateState(threshold=float(threshold), denoise=denoise)
    return [gated_predict(state, frame, model_fn) for frame in frames], state


def write_stream_report(records, fh):
    """Write per-frame rows plus a trailing summary comment.

    Columns: t, sad, scene_type, label_name, model_invoked.  sad is empty
    on the first frame; scene_type is 1 for a new scene, else 0.
    """
    fh.write("t,sad,scene_type,label_name,model_invoked\n")
    invoked = 0
    for rec in records:
        sad_field = "" if rec.sad_value is None else str(rec.sad_value)
        invoked += int(rec.invoked)
        fh.write(f"{rec.t},{sad_field},{int(rec.scene_change)},"
                 f"{label_name(rec.label)},{int(rec.invoked)}\n")
    total = len(records)
    ratio = invoked / total if total else 0.0
    fh.write(f"# invoked {invoked} of {total} frames (ratio {ratio:.4f})\n")


def format_stream_report(records):
    """Report as a string; see write_stream_report."""
    buf = io.StringIO()
    write_stream_report(records, buf)
    return buf.getvalue()
