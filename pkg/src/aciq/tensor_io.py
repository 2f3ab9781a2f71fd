"""Binary tensor files: one JSON header line, then little-endian f32 payload.

Layout, byte-exact:

    {"magic":"aciq-tensor-v1","shape":[...],"channel_axis":K,"dtype":"f32le"}\n
    <4 * prod(shape) bytes of little-endian IEEE-754 float32, channel-major>

Values are stored as 32-bit floats on disk and promoted to 64-bit in memory.
Non-finite payloads are rejected at load: every downstream computation
assumes finite values.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .quantizer import ChannelTensor

MAGIC = "aciq-tensor-v1"
DTYPE = "f32le"


class TensorFileError(Exception):
    """Base error for tensor files; ``code`` is a stable identifier."""

    code = "tensor-file"


class HeaderError(TensorFileError):
    code = "bad-header"


class BadMagicError(TensorFileError):
    code = "bad-magic"


class PayloadMismatchError(TensorFileError):
    code = "payload-mismatch"


class NonFiniteError(TensorFileError):
    code = "non-finite"


def write_tensor(tensor: ChannelTensor, path) -> None:
    """Write a conforming tensor file; identical tensors give identical bytes."""
    if not np.all(np.isfinite(tensor.data)):
        raise NonFiniteError(f"refusing to write non-finite values: {path}")
    header = {
        "magic": MAGIC,
        "shape": list(tensor.shape),
        "channel_axis": tensor.channel_axis,
        "dtype": DTYPE,
    }
    line = json.dumps(header, separators=(",", ":")) + "\n"
    payload = tensor.data.astype("<f4").tobytes()
    with open(path, "wb") as f:
        f.write(line.encode("utf-8"))
        f.write(payload)


def read_tensor(path) -> ChannelTensor:
    """Load a tensor file, validating magic, shape and payload length."""
    with open(path, "rb") as f:
        raw = f.readline()
        payload = f.read()
    if not raw.endswith(b"\n"):
        raise HeaderError(f"missing header line terminator: {path}")
    try:
        header = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise HeaderError(f"unparseable header: {path}") from exc
    if not isinstance(header, dict) or header.get("magic") != MAGIC:
        raise BadMagicError(f"bad magic: {path}")
    if header.get("dtype") != DTYPE:
        raise HeaderError(f"unsupported dtype {header.get('dtype')!r}: {path}")
    shape = header.get("shape")
    axis = header.get("channel_axis")
    if (
        not isinstance(shape, list)
        or not shape
        or not all(isinstance(s, int) and s > 0 for s in shape)
        or not isinstance(axis, int)
        or not 0 <= axis < len(shape)
    ):
        raise HeaderError(f"invalid shape or channel_axis: {path}")
    n = math.prod(shape)
    if len(payload) != 4 * n:
        raise PayloadMismatchError(f"payload length mismatch: {path}")
    data = np.frombuffer(payload, dtype="<f4").astype(np.float64)
    if not np.all(np.isfinite(data)):
        raise NonFiniteError(f"non-finite values in payload: {path}")
    return ChannelTensor(tuple(shape), axis, data)
