"""Bit-exact binary field snapshots.

Layout (little-endian throughout):

    magic   4 bytes  b"HKEL"
    version u32      currently 1
    n       u32      spatial dimension
    N       u32      points per axis
    ncomp   u32      number of field components
    time    f64      sample time
    data    ncomp * N^n f64, row-major

Total length is 28 + 8 * ncomp * N^n bytes; write-then-read round-trips
bitwise.
"""

import struct

import numpy as np

MAGIC = b"HKEL"
VERSION = 1
_HEADER = struct.Struct("<4sIIIId")


def write_snapshot(path, n, size, time, components):
    """Write a stack of scalar fields (leading axis = component)."""
    data = np.ascontiguousarray(components, dtype="<f8")
    ncomp = int(np.prod(data.shape[: data.ndim - n], dtype=int)) if data.ndim > n else 1
    if data.shape[-n:] != (size,) * n:
        raise ValueError(f"field shape {data.shape} does not match grid {(size,) * n}")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, n, size, ncomp, float(time)))
        fh.write(data.tobytes())


def read_snapshot(path):
    """Read a snapshot; returns (n, size, time, array of shape (ncomp, N^n...))."""
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise ValueError(f"{path}: truncated header")
        magic, version, n, size, ncomp, time = _HEADER.unpack(header)
        if magic != MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        if version != VERSION:
            raise ValueError(f"{path}: unsupported version {version}")
        payload = fh.read()
    expected = 8 * ncomp * size**n
    if len(payload) != expected:
        raise ValueError(f"{path}: payload is {len(payload)} bytes, expected {expected}")
    data = np.frombuffer(payload, dtype="<f8").reshape((ncomp,) + (size,) * n)
    return n, size, time, data.copy()
