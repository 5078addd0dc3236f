"""T3B tensor files and plain-text label files.

T3B layout: magic ``b"T3B1"``, three little-endian uint32 extents
``n1, n2, n3``, then ``n1*n2*n3`` little-endian float64 values with the
frontal slice index outermost, then row, then column.
"""
import struct
from pathlib import Path

import numpy as np

from .errors import BadMagic, LabelMismatch, Truncated
from .tensor import as_tensor

MAGIC = b"T3B1"
_HEADER = struct.Struct("<4s3I")


def tensor_to_bytes(a):
    a = as_tensor(a)
    n1, n2, n3 = a.shape
    payload = np.ascontiguousarray(np.moveaxis(a, 2, 0), dtype="<f8").tobytes()
    return _HEADER.pack(MAGIC, n1, n2, n3) + payload


def tensor_from_bytes(buf):
    if len(buf) < _HEADER.size:
        raise Truncated(f"T3B header needs {_HEADER.size} bytes, got {len(buf)}")
    magic, n1, n2, n3 = _HEADER.unpack_from(buf)
    if magic != MAGIC:
        raise BadMagic(f"expected magic {MAGIC!r}, got {magic!r}")
    count = n1 * n2 * n3
    need = _HEADER.size + 8 * count
    if len(buf) < need:
        raise Truncated(f"T3B payload for {n1}x{n2}x{n3} needs {need} bytes, got {len(buf)}")
    vals = np.frombuffer(buf, dtype="<f8", count=count, offset=_HEADER.size)
    return as_tensor(np.moveaxis(vals.reshape(n3, n1, n2), 0, 2).astype(np.float64))


def write_t3b(path, a):
    Path(path).write_bytes(tensor_to_bytes(a))


def read_t3b(path):
    return tensor_from_bytes(Path(path).read_bytes())


def read_labels(path, n_samples=None):
    """One integer label per line; blank trailing lines are ignored."""
    lines = [ln.strip() for ln in Path(path).read_text(encoding="utf-8").splitlines()]
    while lines and not lines[-1]:
        lines.pop()
    try:
        labels = np.array([int(ln) for ln in lines], dtype=np.int64)
    except ValueError as exc:
        raise LabelMismatch(f"{path}: non-integer label ({exc})") from None
    if n_samples is not None and labels.size != n_samples:
        raise LabelMismatch(f"{path}: {labels.size} labels for {n_samples} samples")
    return labels


def write_labels(path, labels):
    Path(path).write_text("".join(f"{int(v)}\n" for v in labels), encoding="utf-8")
