"""Per-channel affine correction of quantized weights.

Quantization biases both the mean and the spread of a weight channel.  The
correction rescales each quantized channel by the ratio of centred L2 norms
and shifts it so that the corrected channel reproduces the original mean and
centred norm exactly.  Both constants fold into an affine scale/offset
reconstruction, so deployment costs nothing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quantizer import ChannelTensor


@dataclass(frozen=True, eq=False)
class CorrectionTerms:
    """Per-channel offset ``mu`` and scale ``xi`` for ``w -> xi * (w + mu)``."""

    mu: np.ndarray
    xi: np.ndarray

    def __post_init__(self) -> None:
        mu = np.asarray(self.mu, dtype=np.float64).ravel()
        xi = np.asarray(self.xi, dtype=np.float64).ravel()
        if mu.size != xi.size:
            raise ValueError("mu and xi must have matching lengths")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "xi", xi)


def correction_terms(original: ChannelTensor, quantized: ChannelTensor) -> CorrectionTerms:
    """Constants that restore each channel's mean and centred L2 norm.

    ``xi`` is the ratio of centred norms, ``||W - E(W)|| / ||W^q - E(W^q)||``
    (1 when the quantized channel is constant).  ``mu`` is chosen so that the
    rescaled channel keeps the original mean exactly:
    ``xi * (E(W^q) + mu) = E(W)``.
    """
    if original.shape != quantized.shape or original.channel_axis != quantized.channel_axis:
        raise ValueError("original and quantized tensors must have matching shapes")
    orig = original.channels()
    quant = quantized.channels()
    mean_o = orig.mean(axis=1)
    mean_q = quant.mean(axis=1)
    norm_o = np.linalg.norm(orig - mean_o[:, None], axis=1)
    norm_q = np.linalg.norm(quant - mean_q[:, None], axis=1)
    xi = np.where(norm_q > 0, norm_o / np.where(norm_q > 0, norm_q, 1.0), 1.0)
    mu = mean_o / xi - mean_q
    return CorrectionTerms(mu, xi)


def apply_correction(quantized: ChannelTensor, terms: CorrectionTerms) -> ChannelTensor:
    """Apply ``w -> xi_c * (w + mu_c)`` to every element of each channel."""
    if terms.mu.size != quantized.n_channels:
        raise ValueError("channel count mismatch")
    chans = quantized.channels()
    corrected = terms.xi[:, None] * (chans + terms.mu[:, None])
    return quantized.with_data(corrected)


def fold_correction(scale: float, offset: float, mu: float, xi: float) -> tuple[float, float]:
    """Fold the correction into an affine reconstruction ``scale*code + offset``.

    Returns ``(xi*scale, xi*(offset + mu))`` so that reconstructing with the
    folded parameters equals applying the correction afterwards, exactly.
    """
    return xi * scale, xi * (offset + mu)
