"""Closed-form expected MSE of the clipped uniform midpoint quantizer and the
clipping value that minimises it.

For a centred symmetric density f, clipping value a and bit-width M, the
expected squared error splits into a saturation term (mass beyond the
clipping range, reproduced at the range boundary) and a rounding term
(in-range values rounded to bin midpoints).  Approximating f as uniform
inside the range gives the rounding term a^2/(3*4^M) for a symmetric range
and a^2/(24*4^M) for the one-sided range of rectified activations; a
piece-wise linear refinement evaluates f at the bin midpoints instead.

Closed forms per (family, mode), with s the scale (b or sigma):

    Laplace  symmetric  2 s^2 e^(-a/s) + a^2/(3*4^M)
    Laplace  relu         s^2 e^(-a/s) + a^2/(24*4^M)
    Gaussian symmetric  (a^2+s^2) erfc(a/(sqrt2 s)) + a^2/(3*4^M)
                           - sqrt(2/pi) a s e^(-a^2/(2 s^2))
    Gaussian relu       half the Gaussian saturation term + a^2/(24*4^M)

The derivatives used by the optimiser are the exact derivatives of these
expressions with respect to a.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .distributions import LAPLACE, DistributionModel, pdf

SYMMETRIC = "symmetric"
FUSED_RELU = "relu"  # quantizing max(0, X) on [0, alpha]
ANALYTIC_MODES = (SYMMETRIC, FUSED_RELU)

MIN_BITS = 1
MAX_BITS = 16

# Default root bracket for the optimal clipping value, in units of the
# scale.  The Laplace root exceeds 20*scale from M = 15 up, hence 40.
BRACKET_LOW = 1e-3
BRACKET_HIGH = 40.0
BRACKET_TOL = 1e-9


@dataclass(frozen=True)
class AciqSetting:
    """Binds a distribution model and bit-width to a quantizer mode."""

    model: DistributionModel
    bits: int
    mode: str = SYMMETRIC

    def __post_init__(self) -> None:
        if not MIN_BITS <= self.bits <= MAX_BITS:
            raise ValueError(f"bits must be in [{MIN_BITS}, {MAX_BITS}]")
        if self.mode not in ANALYTIC_MODES:
            raise ValueError(f"unknown mode: {self.mode!r}")


def erf(x):
    """Error function, exact to machine precision (scalar or array)."""
    out = special.erf(np.asarray(x, dtype=np.float64))
    return float(out) if out.ndim == 0 else out


def rounding_noise_uniform(alpha, bits: int, mode: str = SYMMETRIC):
    """Rounding MSE under the uniform in-range density approximation."""
    a = np.asarray(alpha, dtype=np.float64)
    if mode == SYMMETRIC:
        out = a * a / (3.0 * 4.0**bits)
    elif mode == FUSED_RELU:
        out = a * a / (24.0 * 4.0**bits)
    else:
        raise ValueError(f"unknown mode: {mode!r}")
    return float(out) if out.ndim == 0 else out


def _pwl_from_density(density, alpha: float, bits: int) -> float:
    # (2 a^3 / (3 * 8^M)) * sum_i f(q_i) over the symmetric-grid midpoints,
    # equivalently (delta^3 / 12) * sum_i f(q_i).
    n = 2**bits
    delta = 2.0 * alpha / n
    mids = -alpha + (2 * np.arange(n) + 1) * (delta / 2.0)
    return float(2.0 * alpha**3 / (3.0 * 8.0**bits) * np.sum(density(mids)))


def rounding_noise_pwl(model: DistributionModel, alpha: float, bits: int) -> float:
    """Rounding MSE with the density piece-wise linearised at bin midpoints.

    Substituting the uniform density 1/(2a) recovers
    ``rounding_noise_uniform`` exactly.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    return _pwl_from_density(lambda x: pdf(model, x), float(alpha), int(bits))


def clip_noise(model: DistributionModel, alpha):
    """Two-tail saturation MSE: 2 * integral_a^inf f(x) (x - a)^2 dx.

    The Gaussian branch goes through erfc rather than 1 - erf: the closed
    form subtracts two nearly equal exponentially small terms, and erfc
    keeps full relative precision in the far tail.
    """
    a = np.asarray(alpha, dtype=np.float64)
    s = model.scale
    if model.family == LAPLACE:
        out = 2.0 * s * s * np.exp(-a / s)
    else:
        z = a / (math.sqrt(2.0) * s)
        out = (a * a + s * s) * special.erfc(z) - (
            math.sqrt(2.0 / math.pi) * a * s * np.exp(-a * a / (2.0 * s * s))
        )
    return float(out) if out.ndim == 0 else out


def mse(setting: AciqSetting, alpha):
    """Total expected MSE (saturation + uniform-approximation rounding)."""
    a = np.asarray(alpha, dtype=np.float64)
    full = clip_noise(setting.model, a)
    if setting.mode == SYMMETRIC:
        out = full + rounding_noise_uniform(a, setting.bits, SYMMETRIC)
    else:
        out = 0.5 * np.asarray(full) + rounding_noise_uniform(a, setting.bits, FUSED_RELU)
    out = np.asarray(out)
    return float(out) if out.ndim == 0 else out


def mse_derivative(setting: AciqSetting, alpha):
    """Exact derivative of ``mse`` with respect to the clipping value."""
    a = np.asarray(alpha, dtype=np.float64)
    s = setting.model.scale
    four_m = 4.0**setting.bits
    if setting.model.family == LAPLACE:
        clip_term = -2.0 * s * np.exp(-a / s)
    else:
        z = a / (math.sqrt(2.0) * s)
        clip_term = 2.0 * a * special.erfc(z) - (
            2.0 * math.sqrt(2.0 / math.pi) * s * np.exp(-a * a / (2.0 * s * s))
        )
    if setting.mode == SYMMETRIC:
        out = clip_term + 2.0 * a / (3.0 * four_m)
    else:
        out = 0.5 * np.asarray(clip_term) + a / (12.0 * four_m)
    out = np.asarray(out)
    return float(out) if out.ndim == 0 else out


def optimal_alpha(setting: AciqSetting, bracket: tuple[float, float] | None = None) -> float:
    """Clipping value minimising ``mse``, by bisection on its derivative.

    The derivative is negative at tiny clipping values (widening the range
    always helps at first) and positive once the rounding term dominates;
    bisection over the bracket is therefore guaranteed to converge.  The
    result scales linearly with the model scale.
    """
    s = setting.model.scale
    lo, hi = bracket if bracket is not None else (BRACKET_LOW * s, BRACKET_HIGH * s)
    flo = mse_derivative(setting, lo)
    fhi = mse_derivative(setting, hi)
    if flo == 0.0:
        return float(lo)
    if fhi == 0.0:
        return float(hi)
    if flo > 0.0 or fhi < 0.0:
        raise ValueError("no optimum in bracket")
    tol = BRACKET_TOL * s
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mse_derivative(setting, mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
