"""Exception hierarchy for the ferlite package."""


class FerliteError(Exception):
    """Base class for all ferlite errors."""


class ShapeError(FerliteError):
    """Tensor shapes do not agree with an operation's contract."""


class ConfigError(FerliteError):
    """Invalid configuration value (model, training, augmentation, CLI)."""


class InputError(FerliteError):
    """Invalid runtime input (out-of-range label, mismatched frames, empty data)."""


class DataError(FerliteError):
    """A data file could not be read or parsed."""


class CsvParseError(DataError):
    """Malformed FER CSV row; message names the offending line."""


class PgmError(DataError):
    """Malformed or unreadable PGM file; message names the file."""


class CheckpointError(DataError):
    """Base class for checkpoint load failures."""


class CheckpointFormatError(CheckpointError):
    """Checkpoint has bad magic bytes or malformed structure."""


class CheckpointTruncatedError(CheckpointError):
    """Checkpoint ended before all declared tensors were read."""


class ArchitectureMismatchError(CheckpointError):
    """Checkpoint tensors do not match the declared architecture digest."""


class TrainingError(FerliteError):
    """Training produced a non-finite loss or gradient."""
