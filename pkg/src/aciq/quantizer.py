"""Uniform midpoint quantizer: clipping, grid geometry, the min/max baseline
and empirical error measurement.

The quantizer works in reconstruction space: outputs are real midpoints (or
min/max lattice points), never integer codes.  A value on an interior bin
edge belongs to the upper bin; the top bin is closed, so saturated values
reproduce at the top bin's midpoint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SYMMETRIC = "symmetric"  # range [-alpha, alpha]
UNSIGNED = "unsigned"    # range [0, alpha], for rectified activations
GRID_MODES = (SYMMETRIC, UNSIGNED)

MIN_BITS = 1
MAX_BITS = 16


@dataclass(frozen=True, eq=False)
class QuantGrid:
    """Geometry of a uniform midpoint quantizer.

    ``n_levels`` midpoints spread over ``[-alpha, alpha]`` (symmetric) or
    ``[0, alpha]`` (unsigned).  ``bits`` is set when ``n_levels`` is a power
    of two, else ``None`` (bin-quota searches use arbitrary level counts).
    """

    alpha: float
    mode: str
    n_levels: int
    bits: int | None
    delta: float
    low: float
    midpoints: np.ndarray


def make_grid(alpha: float, bits: int, mode: str = SYMMETRIC) -> QuantGrid:
    """Grid with ``2**bits`` midpoints; step 2a/2^M symmetric, a/2^M unsigned."""
    bits = int(bits)
    if not MIN_BITS <= bits <= MAX_BITS:
        raise ValueError(f"bits must be in [{MIN_BITS}, {MAX_BITS}]")
    return make_grid_levels(alpha, 2**bits, mode)


def make_grid_levels(alpha: float, n_levels: int, mode: str = SYMMETRIC) -> QuantGrid:
    """Grid with an arbitrary positive number of equal-width bins."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if mode not in GRID_MODES:
        raise ValueError(f"unknown grid mode: {mode!r}")
    n_levels = int(n_levels)
    if n_levels < 1:
        raise ValueError("need at least one level")
    low = -float(alpha) if mode == SYMMETRIC else 0.0
    delta = (float(alpha) - low) / n_levels
    midpoints = low + (2 * np.arange(n_levels) + 1) * (delta / 2.0)
    bits = n_levels.bit_length() - 1 if n_levels & (n_levels - 1) == 0 else None
    return QuantGrid(float(alpha), mode, n_levels, bits, delta, low, midpoints)


def clip(x, alpha: float):
    """Saturate at ``+-alpha``: x if |x| <= alpha, else sign(x)*alpha."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    out = np.clip(np.asarray(x, dtype=np.float64), -alpha, alpha)
    return float(out) if out.ndim == 0 else out


def quantize(x, grid: QuantGrid):
    """Round to the midpoint of the bin containing the clipped value.

    Accepts scalars or arrays.  Out-of-range values saturate into the first
    or last bin, so the output is always one of ``grid.midpoints``.
    """
    xs = np.asarray(x, dtype=np.float64)
    high = grid.low + grid.n_levels * grid.delta
    idx = np.floor((np.clip(xs, grid.low, high) - grid.low) / grid.delta)
    idx = np.clip(idx, 0, grid.n_levels - 1)
    out = grid.low + (idx + 0.5) * grid.delta
    return float(out) if out.ndim == 0 else out


def quantize_minmax_channel(channel, bits: int) -> tuple[np.ndarray, float, float]:
    """Uniform lattice between the channel's min and max (the naive baseline).

    The range ``[min, max]`` is split into ``2**bits`` levels with both
    endpoints representable; values round to the nearest level.  Returns
    ``(quantized, scale, offset)`` with reconstruction ``scale*code + offset``.
    A constant channel passes through unchanged with the ``scale = 0``
    convention and ``offset`` equal to the constant.
    """
    x = np.asarray(channel, dtype=np.float64)
    if x.size == 0:
        raise ValueError("empty channel")
    bits = int(bits)
    if not MIN_BITS <= bits <= MAX_BITS:
        raise ValueError(f"bits must be in [{MIN_BITS}, {MAX_BITS}]")
    lo = float(x.min())
    hi = float(x.max())
    if hi == lo:
        return x.copy(), 0.0, lo
    scale = (hi - lo) / (2**bits - 1)
    codes = np.round((x - lo) / scale)
    return lo + codes * scale, scale, lo


def empirical_mse(samples, grid: QuantGrid) -> float:
    """Mean squared error between samples and their quantized values."""
    x = np.asarray(samples, dtype=np.float64)
    if x.size == 0:
        raise ValueError("empty input")
    q = quantize(x, grid)
    return float(np.mean((x - q) ** 2))


@dataclass(frozen=True, eq=False)
class ChannelTensor:
    """Channel-major real tensor: flat ``data`` with the channel axis slowest."""

    shape: tuple[int, ...]
    channel_axis: int
    data: np.ndarray

    def __post_init__(self) -> None:
        shape = tuple(int(s) for s in self.shape)
        object.__setattr__(self, "shape", shape)
        if len(shape) == 0 or any(s < 1 for s in shape):
            raise ValueError("shape must be non-empty with positive extents")
        if not 0 <= self.channel_axis < len(shape):
            raise ValueError("channel_axis out of range")
        data = np.ascontiguousarray(np.asarray(self.data, dtype=np.float64).ravel())
        object.__setattr__(self, "data", data)
        if data.size != math.prod(shape):
            raise ValueError("data length does not match shape")

    @property
    def n_channels(self) -> int:
        return self.shape[self.channel_axis]

    def channels(self) -> np.ndarray:
        """``(n_channels, elements_per_channel)`` view of the data."""
        return self.data.reshape(self.n_channels, -1)

    def with_data(self, data) -> "ChannelTensor":
        """Same shape and channel axis, new values."""
        return ChannelTensor(self.shape, self.channel_axis, np.asarray(data).ravel())

    @classmethod
    def from_array(cls, arr, channel_axis: int = 0) -> "ChannelTensor":
        a = np.asarray(arr, dtype=np.float64)
        flat = np.moveaxis(a, channel_axis, 0).ravel()
        return cls(tuple(a.shape), channel_axis, flat)

    def to_array(self) -> np.ndarray:
        rest = [s for i, s in enumerate(self.shape) if i != self.channel_axis]
        arr = self.data.reshape(self.n_channels, *rest)
        return np.moveaxis(arr, 0, self.channel_axis)
