"""Binary model checkpoints.

Layout (all integers little-endian):

    8 bytes   magic "FERCKPT1"
    16 bytes  MD5 digest of the canonical architecture descriptor
    uint32    tensor count
    per tensor:
        uint16  name length, then UTF-8 name
        uint8   rank
        uint32  dim sizes (rank of them)
        float32 row-major data

Stored tensors cover every learnable parameter plus batch-norm running
statistics and their update counter, so save -> load is bit-exact and a
reloaded model evaluates identically.  The digest lets load refuse files
whose tensors do not describe the architecture announced in the header.
"""

import hashlib
import json
import struct

import numpy as np

from ferlite.errors import (
    ArchitectureMismatchError,
    CheckpointFormatError,
    CheckpointTruncatedError,
)
from ferlite.model import BatchNorm, FerModel, ModelConfig, build_fer_cnn

MAGIC = b"FERCKPT1"


def architecture_digest(config: ModelConfig) -> bytes:
    descriptor = json.dumps(
        {
            "conv_channels": list(config.conv_channels),
            "dense_sizes": list(config.dense_sizes),
            "kernel_size": config.kernel_size,
            "input_size": 48,
        },
        sort_keys=True,
    )
    return hashlib.md5(descriptor.encode("ascii")).digest()


def _tensors_of(model: FerModel):
    items = [("meta.dropout_p", np.asarray([model.config.dropout_p], dtype=np.float32))]
    for lname, layer in model.param_layers():
        for pname, arr in sorted(layer.params().items()):
            items.append((f"{lname}.{pname}", arr))
        if isinstance(layer, BatchNorm):
            items.append((f"{lname}.running_mean", layer.running_mean))
            items.append((f"{lname}.running_var", layer.running_var))
            items.append((f"{lname}.updates", np.asarray([layer.updates], dtype=np.float32)))
    return items


def save_checkpoint(model: FerModel, path) -> None:
    tensors = _tensors_of(model)
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(architecture_digest(model.config))
        f.write(struct.pack("<I", len(tensors)))
        for name, arr in tensors:
            encoded = name.encode("utf-8")
            f.write(struct.pack("<H", len(encoded)))
            f.write(encoded)
            f.write(struct.pack("<B", arr.ndim))
            for dim in arr.shape:
                f.write(struct.pack("<I", dim))
            f.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())


def _read_exact(f, n, what):
    data = f.read(n)
    if len(data) != n:
        raise CheckpointTruncatedError(f"truncated checkpoint: unexpected end of file in {what}")
    return data


def _read_tensors(f):
    (count,) = struct.unpack("<I", _read_exact(f, 4, "tensor count"))
    tensors = {}
    for _ in range(count):
        (name_len,) = struct.unpack("<H", _read_exact(f, 2, "tensor name length"))
        name = _read_exact(f, name_len, "tensor name").decode("utf-8")
        (rank,) = struct.unpack("<B", _read_exact(f, 1, f"rank of {name}"))
        dims = [
            struct.unpack("<I", _read_exact(f, 4, f"dims of {name}"))[0]
            for _ in range(rank)
        ]
        if any(d == 0 for d in dims):
            raise CheckpointFormatError(f"tensor {name} declares a zero dimension")
        size = int(np.prod(dims, dtype=np.int64)) if dims else 1
        raw = _read_exact(f, 4 * size, f"data of {name}")
        if name in tensors:
            raise CheckpointFormatError(f"duplicate tensor {name}")
        tensors[name] = np.frombuffer(raw, dtype="<f4").reshape(dims).astype(np.float32)
    if f.read(1):
        raise CheckpointFormatError("trailing bytes after final tensor")
    return tensors


def _config_from_tensors(tensors) -> ModelConfig:
    def shape_of(name):
        if name not in tensors:
            raise ArchitectureMismatchError(f"checkpoint lacks required tensor {name}")
        return tensors[name].shape

    conv_channels = []
    cin = 1
    kernel_size = None
    for i in range(1, 5):
        shape = shape_of(f"block{i}.conv.w")
        if len(shape) != 4 or shape[1] != cin or shape[2] != shape[3]:
            raise ArchitectureMismatchError(
                f"tensor block{i}.conv.w has unexpected shape {shape}")
        if kernel_size is None:
            kernel_size = shape[2]
        elif shape[2] != kernel_size:
            raise ArchitectureMismatchError("inconsistent kernel sizes across blocks")
        conv_channels.append(shape[0])
        cin = shape[0]
    dense_sizes = [shape_of(f"dense{j}.w")[0] for j in range(1, 4)]
    dropout_p = float(tensors["meta.dropout_p"][0]) if "meta.dropout_p" in tensors else 0.0
    try:
        return ModelConfig(
            conv_channels=tuple(conv_channels),
            dense_sizes=tuple(dense_sizes),
            kernel_size=kernel_size,
            dropout_p=dropout_p,
        )
    except Exception as exc:
        raise ArchitectureMismatchError(f"checkpoint describes an invalid model: {exc}") from exc


def load_checkpoint(path) -> FerModel:
    """Rebuild a model from a checkpoint; bit-exact with the saved one."""
    with open(path, "rb") as f:
        magic = _read_exact(f, len(MAGIC), "magic")
        if magic != MAGIC:
            raise CheckpointFormatError(f"bad magic bytes: {magic!r}")
        digest = _read_exact(f, 16, "architecture digest")
        tensors = _read_tensors(f)

    config = _config_from_tensors(tensors)
    if architecture_digest(config) != digest:
        raise ArchitectureMismatchError(
            "architecture digest does not match the checkpoint's tensors")

    model = build_fer_cnn(config)
    consumed = {"meta.dropout_p"}
    for lname, layer in model.param_layers():
        for pname, arr in layer.params().items():
            name = f"{lname}.{pname}"
            if name not in tensors:
                raise ArchitectureMismatchError(f"checkpoint lacks required tensor {name}")
            if tensors[name].shape != arr.shape:
                raise ArchitectureMismatchError(
                    f"tensor {name} shape {tensors[name].shape} != expected {arr.shape}")
            arr[...] = tensors[name]
            consumed.add(name)
        if isinstance(layer, BatchNorm):
            for stat in ("running_mean", "running_var"):
                name = f"{lname}.{stat}"
                if name not in tensors or tensors[name].shape != getattr(layer, stat).shape:
                    raise ArchitectureMismatchError(f"checkpoint lacks valid tensor {name}")
                getattr(layer, stat)[...] = tensors[name]
                consumed.add(name)
            name = f"{lname}.updates"
            if name not in tensors:
                raise ArchitectureMismatchError(f"checkpoint lacks required tensor {name}")
            layer.updates = int(tensors[name][0])
            consumed.add(name)
    extra = set(tensors) - consumed
    if extra:
        raise ArchitectureMismatchError(f"checkpoint has unexpected tensors: {sorted(extra)}")
    return model
