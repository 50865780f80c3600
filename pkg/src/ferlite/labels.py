"""The seven emotion classes and their fixed index <-> name mapping."""

from ferlite.errors import InputError

EMOTIONS = ("Angry", "Disgust", "Fear", "Happy", "Sad", "Surprise", "Neutral")
NUM_CLASSES = len(EMOTIONS)

_NAME_TO_INDEX = {name: i for i, name in enumerate(EMOTIONS)}


def label_name(index: int) -> str:
    if not 0 <= index < NUM_CLASSES:
        raise InputError(f"emotion label index {index} outside [0, {NUM_CLASSES})")
    return EMOTIONS[index]


def label_index(name: str) -> int:
    try:
        return _NAME_TO_INDEX[name]
    except KeyError:
        raise InputError(f"unknown emotion label {name!r}") from None
