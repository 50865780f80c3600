"""Flat key=value configuration files for the train command.

One "key = value" pair per line; # starts a comment.  Keys must be
known and unique: a typo never silently falls back to a default, it is
an error.  Command-line flags take precedence over file values.
"""

from ferlite.errors import ConfigError


def _parse_int(text):
    return int(text, 10)


def _parse_float(text):
    return float(text)


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _parse_bool(text):
    low = text.lower()
    if low in _TRUE:
        return True
    if low in _FALSE:
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_int_list(text):
    return tuple(int(part.strip(), 10) for part in text.split(","))


def _parse_float_pair(text):
    parts = [float(p.strip()) for p in text.split(",")]
    if len(parts) != 2:
        raise ValueError(f"expected two comma-separated numbers, got {text!r}")
    return tuple(parts)


# reusable converters for CLI flag parsing
parse_bool = _parse_bool
parse_int_list = _parse_int_list
parse_float_pair = _parse_float_pair

# every key the train command understands; values are converters
SCHEMA = {
    "seed": _parse_int,
    "epochs": _parse_int,
    "batch_size": _parse_int,
    "lr": _parse_float,
    "momentum": _parse_float,
    "conv_channels": _parse_int_list,
    "dense_sizes": _parse_int_list,
    "dropout": _parse_float,
    "kernel_size": _parse_int,
    "augment": _parse_bool,
    "aug_rotation": _parse_float,
    "aug_brightness": _parse_float_pair,
    "aug_flip": _parse_float,
    "finetune": _parse_bool,
    "finetune_epochs": _parse_int,
    "trainable_dense": _parse_int,
    "target_train_acc": _parse_float,
    "report_interval": _parse_int,
}


def parse_config(text, source="<config>"):
    """Parse config text into a {key: typed value} dict."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source} line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in SCHEMA:
            raise ConfigError(f"{source} line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source} line {lineno}: duplicate key {key!r}")
        if not val:
            raise ConfigError(f"{source} line {lineno}: empty value for {key!r}")
        try:
            values[key] = SCHEMA[key](val)
        except ValueError as exc:
            raise ConfigError(f"{source} line {lineno}: bad value for {key!r}: {exc}") from None
    return values


def load_config(path):
    """Read and parse a config file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_config(text, source=path)
