"""Convolution kernel backend selection.

The compiled extension is preferred when present; the pure-numpy fallback
is always available. Set SPECROB_KERNELS=python|native to force a backend
(forcing "native" raises if the extension is missing). Both backends
implement the same functions with identical semantics; small floating-point
differences from summation order are expected between them, never within
one backend.
"""

import os

_requested = os.environ.get("SPECROB_KERNELS", "auto")

if _requested == "python":
    from . import _numpy as _impl
elif _requested == "native":
    from . import _native as _impl
elif _requested == "auto":
    try:
        from . import _native as _impl
    except ImportError:
        from . import _numpy as _impl
else:
    raise ImportError(f"SPECROB_KERNELS must be auto|python|native, got {_requested!r}")

BACKEND = _impl.BACKEND
conv2d_forward = _impl.conv2d_forward
conv2d_backward_input = _impl.conv2d_backward_input
conv2d_backward_weights = _impl.conv2d_backward_weights
