"""Symmetric distribution models behind the closed-form quantization analysis.

Two families are supported: Laplace (scale ``b``) and Gaussian (scale
``sigma``).  Every analytic expression downstream assumes a centred
symmetric density, so the model carries the mean separately; callers
subtract it up front and add it back after quantization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LAPLACE = "laplace"
GAUSSIAN = "gaussian"
FAMILIES = (LAPLACE, GAUSSIAN)

# Substitute for an estimated scale of 0 (constant input); consumers that
# cannot work with a floor should skip clipping instead.
SCALE_FLOOR = 1e-12


@dataclass(frozen=True)
class DistributionModel:
    """A symmetric distribution: family, positive scale, and mean offset."""

    family: str
    scale: float
    mean: float = 0.0

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family: {self.family!r}")
        if not self.scale > 0:
            raise ValueError("scale must be positive")


def center(samples) -> tuple[np.ndarray, float]:
    """Subtract the arithmetic mean; returns ``(centered, mean)``."""
    x = np.asarray(samples, dtype=np.float64)
    if x.size == 0:
        raise ValueError("empty tensor")
    m = float(x.mean())
    return x - m, m


def estimate_laplace_b(samples) -> float:
    """Mean absolute deviation around the sample mean: b = E|X - E(X)|.

    Returns 0 for a constant input; callers must substitute ``SCALE_FLOOR``
    or skip clipping in that case.
    """
    x = np.asarray(samples, dtype=np.float64)
    if x.size == 0:
        raise ValueError("empty tensor")
    return float(np.abs(x - x.mean()).mean())


def estimate_gaussian_sigma(samples) -> float:
    """Population standard deviation around the sample mean."""
    x = np.asarray(samples, dtype=np.float64)
    if x.size < 2:
        raise ValueError("need at least two samples")
    return float(x.std())


def estimate_scale(samples, family: str) -> float:
    """Family-appropriate scale estimate (MAD for Laplace, std for Gaussian)."""
    if family == LAPLACE:
        return estimate_laplace_b(samples)
    if family == GAUSSIAN:
        return estimate_gaussian_sigma(samples)
    raise ValueError(f"unknown family: {family!r}")


def pdf(model: DistributionModel, x):
    """Density of the model at ``x`` (scalar or array)."""
    z = np.asarray(x, dtype=np.float64) - model.mean
    s = model.scale
    if model.family == LAPLACE:
        out = np.exp(-np.abs(z) / s) / (2.0 * s)
    else:
        out = np.exp(-z * z / (2.0 * s * s)) / (np.sqrt(2.0 * np.pi) * s)
    return float(out) if out.ndim == 0 else out


def _open_uniform(rng: np.random.Generator, n: int) -> np.ndarray:
    # 53-bit integer draw mapped into the open interval (0, 1), keeping
    # log() finite at both ends.
    return (rng.integers(0, 1 << 53, size=n).astype(np.float64) + 0.5) * 2.0**-53


def sample(model: DistributionModel, n: int, seed: int) -> np.ndarray:
    """Draw ``n`` deterministic samples from the model for a fixed seed.

    The uniform source is PCG64 seeded with ``seed``.  Laplace values come
    from the exact inverse CDF of one uniform draw,
    ``x = mean - b*sign(u - 1/2)*ln(1 - 2|u - 1/2|)``; Gaussian values from
    the Box-Muller transform of a pair of uniform draws.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    if model.family == LAPLACE:
        u = _open_uniform(rng, n) - 0.5
        z = -np.sign(u) * np.log1p(-2.0 * np.abs(u))
    else:
        u1 = _open_uniform(rng, n)
        u2 = _open_uniform(rng, n)
        z = np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)
    return model.mean + model.scale * z
