"""Kernel backend selection.

The compiled Cython kernels are preferred; the numpy implementations are a
drop-in fallback.  Set FERLITE_KERNELS=numpy (or =cython) to force a backend;
forcing cython raises if the extension was not built.
"""

import os

from ferlite.errors import ConfigError

_requested = os.environ.get("FERLITE_KERNELS", "auto")
if _requested not in ("auto", "cython", "numpy"):
    raise ConfigError(
        f"FERLITE_KERNELS must be auto, cython or numpy, got {_requested!r}"
    )

if _requested == "numpy":
    from ferlite.kernels import _numpy as _impl
    BACKEND = "numpy"
else:
    try:
        from ferlite.kernels import _cykernels as _impl  # type: ignore[no-redef]
        BACKEND = "cython"
    except ImportError:
        if _requested == "cython":
            raise
        from ferlite.kernels import _numpy as _impl  # type: ignore[no-redef]
        BACKEND = "numpy"

conv2d_forward = _impl.conv2d_forward
conv2d_backward = _impl.conv2d_backward
maxpool2_forward = _impl.maxpool2_forward
maxpool2_backward = _impl.maxpool2_backward
