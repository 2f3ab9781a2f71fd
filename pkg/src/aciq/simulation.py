"""Deterministic Monte Carlo and brute-force oracles for the closed forms.

The simulators here measure the error of the map the analytic expressions
describe: in-range values round to bin midpoints and saturated values
reproduce at the clipping boundary (for rectified inputs, zeros are exactly
representable and contribute no error).  The deployed quantizer in
``quantizer`` differs in one detail — it returns the top bin's midpoint for
saturated values — so formula validation goes through ``model_error`` below
rather than ``quantizer.quantize``.

All randomness is seed-driven; identical inputs produce identical outputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import analytic
from .analytic import FUSED_RELU, SYMMETRIC, AciqSetting
from .bit_allocation import allocate_bins, allocation_mse
from .distributions import GAUSSIAN, DistributionModel, sample

MAX_BRUTE_FORCE_CHANNELS = 4


def model_error(x, alpha: float, n_levels: int, mode: str = SYMMETRIC) -> np.ndarray:
    """Per-sample quantization error of the analytic model's map.

    Symmetric mode: values inside ``[-alpha, alpha]`` round to the midpoint
    of one of ``n_levels`` equal bins; values outside reproduce at the
    boundary, leaving ``|x| - alpha``.  Rectified mode: the same on
    ``[0, alpha]`` for positive values, with non-positive values exactly
    representable (zero error).
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if n_levels < 1:
        raise ValueError("need at least one level")
    xs = np.asarray(x, dtype=np.float64)
    if mode == SYMMETRIC:
        delta = 2.0 * alpha / n_levels
        idx = np.clip(np.floor((np.clip(xs, -alpha, alpha) + alpha) / delta), 0, n_levels - 1)
        mid = -alpha + (idx + 0.5) * delta
        return np.where(np.abs(xs) > alpha, np.abs(xs) - alpha, xs - mid)
    if mode == FUSED_RELU:
        g = np.maximum(xs, 0.0)
        delta = alpha / n_levels
        idx = np.clip(np.floor(np.clip(g, 0.0, alpha) / delta), 0, n_levels - 1)
        mid = (idx + 0.5) * delta
        return np.where(g <= 0.0, 0.0, np.where(g > alpha, g - alpha, g - mid))
    raise ValueError(f"unknown mode: {mode!r}")


def model_empirical_mse(x, alpha: float, bits: int, mode: str = SYMMETRIC) -> float:
    """Mean squared ``model_error`` with ``2**bits`` levels."""
    return float(np.mean(model_error(x, alpha, 2 ** int(bits), mode) ** 2))


@dataclass(frozen=True, eq=False)
class MseCurve:
    """Analytic and simulated MSE over an ascending clipping-value grid.

    The empirical column reuses one fixed sample set across the whole grid
    (paired design), which suppresses Monte Carlo variance in the
    analytic-vs-simulation comparison.
    """

    alphas: np.ndarray
    analytic: np.ndarray
    empirical: np.ndarray
    bits: int
    family: str
    mode: str
    n_samples: int
    seed: int


def mse_curve(
    model: DistributionModel,
    bits: int,
    mode: str,
    alpha_grid,
    n: int,
    seed: int,
) -> MseCurve:
    """Closed-form and paired Monte Carlo MSE at each grid clipping value."""
    alphas = np.asarray(alpha_grid, dtype=np.float64)
    if alphas.size == 0 or np.any(np.diff(alphas) <= 0):
        raise ValueError("alpha grid must be ascending and non-empty")
    if n < 1000:
        raise ValueError("need at least 1000 samples")
    setting = AciqSetting(model, int(bits), mode)
    x = sample(model, int(n), seed)
    analytic_col = np.asarray(analytic.mse(setting, alphas), dtype=np.float64)
    empirical_col = np.array([model_empirical_mse(x, a, bits, mode) for a in alphas])
    return MseCurve(
        alphas=alphas,
        analytic=analytic_col,
        empirical=empirical_col,
        bits=int(bits),
        family=model.family,
        mode=mode,
        n_samples=int(n),
        seed=int(seed),
    )


def empirical_argmin(curve: MseCurve) -> float:
    """Grid clipping value with minimal simulated MSE; ties take the smaller."""
    return float(curve.alphas[int(np.argmin(curve.empirical))])


class TwoChannelResult(NamedTuple):
    best_split: tuple[int, int]
    predicted_split: tuple[float, float]
    mse_table: list[tuple[int, int, float]]


def two_channel_bin_experiment(
    alpha_i: float,
    alpha_j: float,
    quota: int,
    n: int,
    seed: int,
) -> TwoChannelResult:
    """Exhaustive two-channel bin-split search against the closed-form shares.

    Each channel holds ``n`` Gaussian samples with standard deviation equal
    to its range.  Every integer split of the bin quota is measured by the
    summed model-map MSE; the empirically best split is returned alongside
    the fractional closed-form prediction.
    """
    if quota < 4:
        raise ValueError("quota must be at least 4")
    if not (alpha_i > 0 and alpha_j > 0):
        raise ValueError("channel ranges must be positive")
    xi = sample(DistributionModel(GAUSSIAN, alpha_i), int(n), seed)
    xj = sample(DistributionModel(GAUSSIAN, alpha_j), int(n), seed + 1)
    table: list[tuple[int, int, float]] = []
    best = (1, quota - 1)
    best_mse = np.inf
    for b_i in range(1, quota):
        b_j = quota - b_i
        total = float(
            np.mean(model_error(xi, alpha_i, b_i) ** 2)
            + np.mean(model_error(xj, alpha_j, b_j) ** 2)
        )
        table.append((b_i, b_j, total))
        if total < best_mse:
            best_mse = total
            best = (b_i, b_j)
    shares = allocate_bins([alpha_i, alpha_j], float(quota))
    return TwoChannelResult(best, (float(shares[0]), float(shares[1])), table)


def _compositions(total: int, parts: int):
    # All ways to write `total` as an ordered sum of `parts` positive ints.
    if parts == 1:
        yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def brute_force_bin_allocation(alphas, quota: int, b: float) -> tuple[int, ...]:
    """Integer bin split minimising ``allocation_mse``, by full enumeration."""
    a = np.asarray(alphas, dtype=np.float64)
    if a.size > MAX_BRUTE_FORCE_CHANNELS:
        raise ValueError("too many channels for exhaustive search")
    if quota < a.size:
        raise ValueError("quota must allow one bin per channel")
    best: tuple[int, ...] | None = None
    best_mse = np.inf
    for split in _compositions(int(quota), int(a.size)):
        value = allocation_mse(a, split, b)
        if value < best_mse:
            best_mse = value
            best = split
    assert best is not None
    return best
