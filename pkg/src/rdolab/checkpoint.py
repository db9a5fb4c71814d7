"""Binary parameter checkpoints.

Layout (little-endian)::

    b"RDOW" | u32 version
    repeated until EOF:
        u32 name_len | name (UTF-8) | u32 rank | u64 extent * rank | f64 payload (row-major)

Complex spectral weights are stored as real arrays whose last axis is (re, im).
"""
import struct

import numpy as np

from .errors import FormatError

MAGIC = b"RDOW"
VERSION = 1


def write_checkpoint(path, state):
    """Write ``{name: ndarray}`` in insertion order."""
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        for name, arr in state.items():
            # asarray keeps rank 0; ascontiguousarray would promote it to 1-d
            arr = np.asarray(arr, dtype="<f8")
            raw = name.encode("utf-8")
            fh.write(struct.pack("<I", len(raw)))
            fh.write(raw)
            fh.write(struct.pack("<I", arr.ndim))
            fh.write(struct.pack(f"<{arr.ndim}Q", *arr.shape))
            fh.write(arr.tobytes(order="C"))


def read_checkpoint(path):
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != MAGIC:
        raise FormatError(f"{path}: not a parameter checkpoint (bad magic)")
    (version,) = struct.unpack_from("<I", blob, 4)
    if version != VERSION:
        raise FormatError(f"{path}: unsupported checkpoint version {version}")
    pos = 8
    state = {}
    try:
        while pos < len(blob):
            (nlen,) = struct.unpack_from("<I", blob, pos)
            pos += 4
            name = blob[pos : pos + nlen].decode("utf-8")
            pos += nlen
            (rank,) = struct.unpack_from("<I", blob, pos)
            pos += 4
            shape = struct.unpack_from(f"<{rank}Q", blob, pos)
            pos += 8 * rank
            count = int(np.prod(shape, dtype=np.int64))
            if pos + 8 * count > len(blob):
                raise FormatError(f"{path}: truncated payload for {name!r}")
            state[name] = np.frombuffer(blob, "<f8", count, pos).reshape(shape).astype(np.float64)
            pos += 8 * count
    except struct.error as exc:
        raise FormatError(f"{path}: truncated checkpoint ({exc})") from None
    return state
