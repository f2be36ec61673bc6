"""Minimal NPY v1.0 reader/writer.

Supports C-ordered little-endian float32/float64 and uint8 tensors, the
interchange subset used by public corruption datasets. Headers are padded
so the payload starts at a 64-byte boundary; round trips are bitwise.
"""

import ast
import struct

import numpy as np

__all__ = ["save_tensor", "load_tensor"]

_MAGIC = b"\x93NUMPY"
_SUPPORTED = {"<f4": np.dtype("<f4"), "<f8": np.dtype("<f8"), "|u1": np.dtype("u1")}
_DESCR_OF = {np.dtype("<f4"): "<f4", np.dtype("<f8"): "<f8", np.dtype("u1"): "|u1"}


def save_tensor(path, array: np.ndarray) -> None:
    array = np.ascontiguousarray(array)
    descr = _DESCR_OF.get(array.dtype)
    if descr is None:
        raise ValueError(
            f"unsupported dtype {array.dtype}; supported: {sorted(_SUPPORTED)}"
        )
    header = (
        "{'descr': '%s', 'fortran_order': False, 'shape': %s, }"
        % (descr, repr(array.shape))
    ).encode("latin1")
    # magic(6) + version(2) + header-length(2) + header; pad to 64 bytes.
    unpadded = len(_MAGIC) + 2 + 2 + len(header) + 1
    header += b" " * (-unpadded % 64) + b"\n"
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(bytes([1, 0]))
        fh.write(struct.pack("<H", len(header)))
        fh.write(header)
        fh.write(array.tobytes(order="C"))


def load_tensor(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(6)
        if magic != _MAGIC:
            raise ValueError("not an NPY file (bad magic)")
        version = fh.read(2)
        if version != bytes([1, 0]):
            raise ValueError(f"unsupported NPY version {tuple(version)}")
        (hlen,) = struct.unpack("<H", fh.read(2))
        header = fh.read(hlen)
        if len(header) != hlen:
            raise ValueError("truncated header")
        try:
            meta = ast.literal_eval(header.decode("latin1"))
        except (SyntaxError, ValueError) as exc:
            raise ValueError(f"malformed NPY header: {exc}") from exc
        descr = meta.get("descr")
        if descr not in _SUPPORTED:
            raise ValueError(f"unsupported dtype descr {descr!r}")
        if meta.get("fortran_order") is not False:
            raise ValueError("fortran_order arrays are not supported")
        shape = meta.get("shape")
        if not isinstance(shape, tuple) or not all(
            isinstance(d, int) and d >= 0 for d in shape
        ):
            raise ValueError(f"malformed shape {shape!r}")
        dtype = _SUPPORTED[descr]
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        payload = fh.read(count * dtype.itemsize)
        if len(payload) != count * dtype.itemsize:
            raise ValueError("truncated payload")
        return np.frombuffer(payload, dtype=dtype).reshape(shape).copy()
