"""Binary container for fitted pipelines.

Layout (all integers little-endian)::

    b"MGTD" | u32 format version | u64 header length | header JSON (UTF-8)
    | u64 blob length | array blob

The header is canonical JSON (sorted keys, no whitespace) in which every
numpy array is replaced by ``{"__ndarray__": offset, "dtype": ..., "shape":
...}`` pointing into the blob. Identical states therefore serialize to
identical bytes.
"""

from __future__ import annotations

import json
import struct

import numpy as np

MAGIC = b"MGTD"
FORMAT_VERSION = 1

_U32 = struct.Struct("<I")
_U64 = struct.Struct("<Q")


class ModelFormatError(ValueError):
    pass


def _encode(obj, blob: bytearray):
    if isinstance(obj, np.ndarray):
        arr = np.ascontiguousarray(obj)
        if arr.dtype.kind not in "biuf":
            raise TypeError(f"cannot serialize array of dtype {arr.dtype}")
        arr = arr.astype(arr.dtype.newbyteorder("<"), copy=False)
        ref = {"__ndarray__": len(blob), "dtype": arr.dtype.str, "shape": list(arr.shape)}
        blob.extend(arr.tobytes())
        return ref
    if isinstance(obj, dict):
        return {str(k): _encode(v, blob) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_encode(v, blob) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _decode(obj, blob: bytes):
    if isinstance(obj, dict):
        if "__ndarray__" in obj:
            dtype = np.dtype(obj["dtype"])
            shape = tuple(obj["shape"])
            count = int(np.prod(shape)) if shape else 1
            start = obj["__ndarray__"]
            end = start + count * dtype.itemsize
            if end > len(blob):
                raise ModelFormatError("incompatible model file: array data truncated")
            return np.frombuffer(blob[start:end], dtype=dtype).reshape(shape).copy()
        return {k: _decode(v, blob) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_decode(v, blob) for v in obj]
    return obj


def dumps(state: dict, version: int = FORMAT_VERSION) -> bytes:
    blob = bytearray()
    header = _encode(state, blob)
    text = json.dumps(header, sort_keys=True, separators=(",", ":"), ensure_ascii=True, allow_nan=True)
    head = text.encode("utf-8")
    return b"".join(
        [MAGIC, _U32.pack(version), _U64.pack(len(head)), head, _U64.pack(len(blob)), bytes(blob)]
    )


def loads(data: bytes, expected_version: int = FORMAT_VERSION) -> dict:
    if len(data) < 8 or data[:4] != MAGIC:
        raise ModelFormatError("incompatible model file: bad magic bytes")
    (version,) = _U32.unpack_from(data, 4)
    if version != expected_version:
        raise ModelFormatError(
            f"incompatible model file: format version {version}, this build reads {expected_version}"
        )
    pos = 8
    try:
        (head_len,) = _U64.unpack_from(data, pos)
        pos += 8
        head = data[pos : pos + head_len]
        if len(head) != head_len:
            raise ModelFormatError("incompatible model file: header truncated")
        pos += head_len
        (blob_len,) = _U64.unpack_from(data, pos)
        pos += 8
    except struct.error:
        raise ModelFormatError("incompatible model file: truncated") from None
    blob = data[pos : pos + blob_len]
    if len(blob) != blob_len or pos + blob_len != len(data):
        raise ModelFormatError("incompatible model file: truncated or trailing data")
    try:
        header = json.loads(head.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError):
        raise ModelFormatError("incompatible model file: corrupt header") from None
    return _decode(header, blob)
