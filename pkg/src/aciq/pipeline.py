"""Quantization pipelines for weight and activation tensors.

Weights run through up to three stages: per-channel bit allocation, min/max
quantization, bias correction.  Activations run through up to two: per-channel
bit allocation, then analytic clipping (or the min/max baseline) before
midpoint quantization.  Analytic clipping applies to activations only and
bias correction to weights only; the combination study evaluates every
subset of the four methods through both role pipelines.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import analytic
from .analytic import FUSED_RELU, SYMMETRIC, AciqSetting
from .bias_correction import apply_correction, correction_terms
from .bit_allocation import allocate_bits
from .distributions import (
    LAPLACE,
    SCALE_FLOOR,
    DistributionModel,
    estimate_scale,
    FAMILIES,
)
from .quantizer import (
    UNSIGNED,
    ChannelTensor,
    make_grid,
    quantize,
    quantize_minmax_channel,
)

METHOD_ACIQ = "aciq"
METHOD_BIT_ALLOC_W = "bit_alloc_w"
METHOD_BIT_ALLOC_A = "bit_alloc_a"
METHOD_BIAS_CORR = "bias_corr"
# Fixed order; the combination matrix counts in binary over these flags,
# least significant first.
METHODS = (METHOD_ACIQ, METHOD_BIT_ALLOC_W, METHOD_BIT_ALLOC_A, METHOD_BIAS_CORR)

ROLE_WEIGHTS = "weights"
ROLE_ACTIVATIONS = "activations"
ROLES = (ROLE_WEIGHTS, ROLE_ACTIVATIONS)


@dataclass(frozen=True)
class PipelineConfig:
    """Method selection and shared knobs for one quantization run."""

    methods: frozenset = frozenset()
    weight_bits: int = 4
    activation_bits: int = 4
    family: str = LAPLACE
    mode: str = SYMMETRIC
    seed: int = 42

    def __post_init__(self) -> None:
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ValueError(f"unknown methods: {sorted(unknown)}")
        if not 1 <= self.weight_bits <= 16 or not 1 <= self.activation_bits <= 16:
            raise ValueError("bit widths must be in [1, 16]")
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family: {self.family!r}")
        if self.mode not in (SYMMETRIC, FUSED_RELU):
            raise ValueError(f"unknown mode: {self.mode!r}")
        object.__setattr__(self, "methods", frozenset(self.methods))


@dataclass(frozen=True)
class ChannelRecord:
    """Per-channel report row: geometry, correction terms and error."""

    channel: int
    bits: int
    alpha: float
    mu: float
    xi: float
    mse: float
    n_elements: int
    note: str = ""


@dataclass(frozen=True)
class QuantizationResult:
    role: str
    tensor: ChannelTensor
    channels: list[ChannelRecord] = field(default_factory=list)
    total_mse: float = 0.0
    seed: int = 42
    methods: tuple = ()


def _per_channel_bits(alphas: np.ndarray, avg_bits: int, enabled: bool) -> np.ndarray:
    if not enabled:
        return np.full(alphas.size, int(avg_bits), dtype=np.int64)
    return allocate_bits(alphas, avg_bits).bits


def quantize_weights(tensor: ChannelTensor, config: PipelineConfig) -> QuantizationResult:
    """Bit allocation (optional) -> per-channel min/max -> bias correction."""
    chans = tensor.channels()
    alphas = np.abs(chans).max(axis=1)
    bits = _per_channel_bits(alphas, config.weight_bits, METHOD_BIT_ALLOC_W in config.methods)
    out = np.empty_like(chans)
    for c in range(tensor.n_channels):
        out[c], _, _ = quantize_minmax_channel(chans[c], int(bits[c]))
    quantized = tensor.with_data(out)
    mu = np.zeros(tensor.n_channels)
    xi = np.ones(tensor.n_channels)
    if METHOD_BIAS_CORR in config.methods:
        terms = correction_terms(tensor, quantized)
        quantized = apply_correction(quantized, terms)
        mu, xi = terms.mu, terms.xi
    return _result(ROLE_WEIGHTS, tensor, quantized, bits, alphas, mu, xi, config)


def quantize_activations(tensor: ChannelTensor, config: PipelineConfig) -> QuantizationResult:
    """Bit allocation (optional) -> analytic clipping or min/max -> midpoint.

    Clipping values are capped at the channel's observed extent (a wider
    range only coarsens the bins without clipping anything).  In rectified
    mode exact zeros stay exactly representable, mirroring deployed
    quantizers that reserve a zero point.
    """
    chans = tensor.channels()
    aciq_on = METHOD_ACIQ in config.methods
    relu = config.mode == FUSED_RELU
    n_ch = tensor.n_channels

    means = np.zeros(n_ch) if relu else chans.mean(axis=1)
    centred = chans - means[:, None]
    scales = np.array([_activation_scale(centred[c], config.family, relu) for c in range(n_ch)])
    max_abs = np.abs(centred).max(axis=1)

    # Ranges that drive the bin shares: the (capped) analytic optimum at the
    # average bit width when clipping is on, the channel's extent otherwise.
    spread = chans.max(axis=1) - chans.min(axis=1)
    if aciq_on:
        alloc_alphas = np.array(
            [
                min(_optimal_alpha(scales[c], config, config.activation_bits), max_abs[c])
                if scales[c] > SCALE_FLOOR and spread[c] > 0
                else 0.0
                for c in range(n_ch)
            ]
        )
    else:
        alloc_alphas = max_abs
    bits = _per_channel_bits(alloc_alphas, config.activation_bits, METHOD_BIT_ALLOC_A in config.methods)

    out = np.empty_like(chans)
    alphas = np.zeros(n_ch)
    notes = [""] * n_ch
    for c in range(n_ch):
        if aciq_on:
            if spread[c] == 0 or scales[c] <= SCALE_FLOOR:
                out[c] = chans[c]
                notes[c] = "constant-pass-through"
                warnings.warn(
                    f"channel {c} is constant; analytic clipping skipped", stacklevel=2
                )
                continue
            alpha = min(_optimal_alpha(scales[c], config, int(bits[c])), max_abs[c])
            grid = make_grid(alpha, int(bits[c]), _grid_mode(relu))
            if relu:
                out[c] = np.where(chans[c] > 0, quantize(chans[c], grid), 0.0)
            else:
                out[c] = quantize(centred[c], grid) + means[c]
            alphas[c] = alpha
        else:
            out[c], _, _ = quantize_minmax_channel(chans[c], int(bits[c]))
            alphas[c] = max_abs[c]
    quantized = tensor.with_data(out)
    mu = np.zeros(n_ch)
    xi = np.ones(n_ch)
    return _result(
        ROLE_ACTIVATIONS, tensor, quantized, bits, alphas, mu, xi, config, notes
    )


def _grid_mode(relu: bool) -> str:
    from .quantizer import SYMMETRIC as GRID_SYMMETRIC

    return UNSIGNED if relu else GRID_SYMMETRIC


def _activation_scale(values: np.ndarray, family: str, relu: bool) -> float:
    if not relu:
        return estimate_scale(values, family)
    # Rectified data: infer the underlying symmetric scale from the positive
    # half (E[X | X > 0] = b for Laplace, E[X^2 | X > 0] = sigma^2 for
    # Gaussian).
    pos = values[values > 0]
    if pos.size == 0:
        return 0.0
    if family == LAPLACE:
        return float(pos.mean())
    return float(np.sqrt(np.mean(pos**2)))


def _optimal_alpha(scale: float, config: PipelineConfig, bits: int) -> float:
    model = DistributionModel(config.family, scale)
    return analytic.optimal_alpha(AciqSetting(model, bits, config.mode))


def _result(role, original, quantized, bits, alphas, mu, xi, config, notes=None):
    orig = original.channels()
    quant = quantized.channels()
    per_channel = ((orig - quant) ** 2).mean(axis=1)
    records = [
        ChannelRecord(
            channel=c,
            bits=int(bits[c]),
            alpha=float(alphas[c]),
            mu=float(mu[c]),
            xi=float(xi[c]),
            mse=float(per_channel[c]),
            n_elements=orig.shape[1],
            note=notes[c] if notes else "",
        )
        for c in range(original.n_channels)
    ]
    total = float(((original.data - quantized.data) ** 2).mean())
    return QuantizationResult(
        role=role,
        tensor=quantized,
        channels=records,
        total_mse=total,
        seed=config.seed,
        methods=tuple(m for m in METHODS if m in config.methods),
    )


def run_pipeline(tensor: ChannelTensor, config: PipelineConfig, role: str) -> QuantizationResult:
    if role == ROLE_WEIGHTS:
        return quantize_weights(tensor, config)
    if role == ROLE_ACTIVATIONS:
        return quantize_activations(tensor, config)
    raise ValueError(f"unknown role: {role!r}")


@dataclass(frozen=True)
class CompareRow:
    """One method combination evaluated through both role pipelines."""

    index: int
    methods: tuple
    label: str
    total_mse: float
    per_channel_mean_mse: float


def combination_label(methods) -> str:
    active = [m for m in METHODS if m in methods]
    return "+".join(active) if active else "none"


def compare_matrix(tensor: ChannelTensor, config: PipelineConfig, full: bool = True) -> list[CompareRow]:
    """Evaluate method combinations in binary counting order over the flags.

    Each combination quantizes the tensor twice — once as weights (using the
    weight-applicable methods of the subset) and once as activations (using
    the activation-applicable ones) — and reports the element-weighted mean
    of the two errors.
    """
    if full:
        indices = range(2 ** len(METHODS))
    else:
        chosen = frozenset(config.methods)
        base = sum(1 << i for i, m in enumerate(METHODS) if m in chosen)
        indices = [0, base] if base else [0]
    rows = []
    for k in indices:
        methods = frozenset(m for i, m in enumerate(METHODS) if k & (1 << i))
        cfg = PipelineConfig(
            methods=methods,
            weight_bits=config.weight_bits,
            activation_bits=config.activation_bits,
            family=config.family,
            mode=config.mode,
            seed=config.seed,
        )
        w = quantize_weights(tensor, cfg)
        a = quantize_activations(tensor, cfg)
        total = 0.5 * (w.total_mse + a.total_mse)
        per_channel = 0.5 * (
            np.mean([r.mse for r in w.channels]) + np.mean([r.mse for r in a.channels])
        )
        rows.append(
            CompareRow(
                index=k,
                methods=tuple(m for m in METHODS if m in methods),
                label=combination_label(methods),
                total_mse=float(total),
                per_channel_mean_mse=float(per_channel),
            )
        )
    return rows
