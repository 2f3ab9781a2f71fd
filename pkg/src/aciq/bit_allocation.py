"""Per-channel bin and bit allocation under a total bin quota.

Minimising the summed per-channel quantization MSE subject to a fixed total
number of bins B yields a closed form: each channel's share of the quota is
proportional to its clipping range raised to the power 2/3.  Bit widths
follow by rounding log2 of the share; rounding can drift the realised bin
total away from B, which is reported rather than silently repaired (an
optional greedy repair enforces the budget strictly).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MIN_ALLOC_BITS = 1
MAX_ALLOC_BITS = 8


@dataclass(frozen=True, eq=False)
class BitAllocation:
    """Fractional bin shares and rounded per-channel bit widths."""

    quota_bins: float
    alphas: np.ndarray
    fractional_bins: np.ndarray
    bits: np.ndarray

    @property
    def realized_bins(self) -> int:
        return int(np.sum(2 ** self.bits.astype(np.int64)))

    @property
    def quota_drift(self) -> float:
        """|realised bins - quota| as a fraction of the quota."""
        return abs(self.realized_bins - self.quota_bins) / self.quota_bins


def allocate_bins(alphas, quota: float) -> np.ndarray:
    """Fractional bin shares: quota * alpha_i^(2/3) / sum_j alpha_j^(2/3).

    Shares sum to the quota, are equivariant under permutation and invariant
    under uniform scaling of all ranges.  Channels with zero range get a
    zero share.
    """
    a = np.asarray(alphas, dtype=np.float64)
    if a.size == 0 or np.any(a < 0):
        raise ValueError("alphas must be non-negative and non-empty")
    if not quota > 0:
        raise ValueError("quota must be positive")
    w = a ** (2.0 / 3.0)
    total = w.sum()
    if total == 0.0:
        raise ValueError("degenerate layer")
    return quota * w / total


def allocate_bits(
    alphas,
    avg_bits: int,
    channels: int | None = None,
    *,
    min_bits: int = MIN_ALLOC_BITS,
    max_bits: int = MAX_ALLOC_BITS,
    repair_quota: bool = False,
) -> BitAllocation:
    """Integer bit widths from the fractional shares: M_i = round(log2 B_i*).

    The quota is ``channels * 2**avg_bits``.  Bit widths are clamped to
    ``[min_bits, max_bits]``; zero-range channels get ``min_bits``.  With
    ``repair_quota`` the channel whose decrement costs least MSE is lowered
    until the realised bin total fits the quota.
    """
    a = np.asarray(alphas, dtype=np.float64)
    if channels is None:
        channels = a.size
    if channels != a.size or channels < 1:
        raise ValueError("channels must match the number of alphas")
    if not 1 <= avg_bits <= 16:
        raise ValueError("avg_bits must be in [1, 16]")
    if not 1 <= min_bits <= max_bits <= 16:
        raise ValueError("need 1 <= min_bits <= max_bits <= 16")
    quota = float(channels) * 2.0**avg_bits
    shares = allocate_bins(a, quota)
    bits = np.full(a.size, min_bits, dtype=np.int64)
    pos = shares > 0
    bits[pos] = np.rint(np.log2(shares[pos])).astype(np.int64)
    np.clip(bits, min_bits, max_bits, out=bits)
    if repair_quota:
        while np.sum(2**bits) > quota:
            can = bits > min_bits
            if not np.any(can):
                break
            # MSE increase of dropping one bit from channel i is
            # alpha_i^2 / 4^M_i (difference of the rounding terms).
            cost = np.where(can, a * a / 4.0**bits, np.inf)
            bits[int(np.argmin(cost))] -= 1
    return BitAllocation(quota, a, shares, bits)


def allocation_mse(alphas, bins, b) -> float:
    """Layer MSE objective with real-valued level counts.

    Sum over channels of ``2 b^2 e^(-alpha_i/b) + alpha_i^2 / (3 bins_i^2)``,
    the per-channel quantizer MSE with ``2**M_i`` generalised to ``bins_i``.
    ``b`` may be a scalar (shared Laplace scale) or one value per channel.
    """
    a = np.asarray(alphas, dtype=np.float64)
    n = np.asarray(bins, dtype=np.float64)
    if a.shape != n.shape:
        raise ValueError("alphas and bins must have matching lengths")
    if np.any(n <= 0):
        raise ValueError("bins must be positive")
    bb = np.broadcast_to(np.asarray(b, dtype=np.float64), a.shape)
    if np.any(bb <= 0):
        raise ValueError("b must be positive")
    return float(np.sum(2.0 * bb * bb * np.exp(-a / bb) + a * a / (3.0 * n * n)))
