"""Histogram-based clipping threshold search minimising KL divergence.

The baseline calibration recipe: build a magnitude histogram, then scan
candidate truncation points.  For each candidate, the reference distribution
P keeps the full mass with the tail folded into the last kept bin, while the
candidate distribution Q is what a 2**bits-level quantizer can express:
the kept bins merged into 2**bits groups, each group's (unfolded) mass
spread evenly over the bins of the group that are non-empty in P.  The
returned threshold is the bin edge with minimal KL(P || Q), ties resolved
toward the smaller threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_BINS = 2048


@dataclass(frozen=True, eq=False)
class Histogram:
    """Equal-width magnitude histogram: ``edges`` ascending, ``counts`` >= 0."""

    edges: np.ndarray
    counts: np.ndarray

    def __post_init__(self) -> None:
        edges = np.asarray(self.edges, dtype=np.float64).ravel()
        counts = np.asarray(self.counts).ravel().astype(np.int64)
        if edges.size != counts.size + 1:
            raise ValueError("edges must be one longer than counts")
        if np.any(np.diff(edges) <= 0):
            raise ValueError("edges must be strictly increasing")
        if np.any(counts < 0) or counts.sum() < 1:
            raise ValueError("counts must be non-negative with positive total")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "counts", counts)


def build_histogram(samples, n_bins: int = DEFAULT_BINS) -> Histogram:
    """Equal-width histogram of ``|samples|`` (one-sided, symmetric threshold)."""
    x = np.asarray(samples, dtype=np.float64)
    if x.size == 0:
        raise ValueError("empty input")
    if n_bins < 1:
        raise ValueError("need at least one bin")
    counts, edges = np.histogram(np.abs(x), bins=int(n_bins))
    return Histogram(edges, counts)


def kl_divergence(p, q) -> float:
    """KL(P||Q) after normalisation; zero-count P bins contribute nothing.

    Returns ``inf`` when some bin has P > 0 but Q = 0.
    """
    ps = np.asarray(p, dtype=np.float64)
    qs = np.asarray(q, dtype=np.float64)
    ps = ps / ps.sum()
    qs = qs / qs.sum()
    mask = ps > 0
    if np.any(qs[mask] == 0):
        return float("inf")
    return float(np.sum(ps[mask] * np.log(ps[mask] / qs[mask])))


def kld_threshold(hist: Histogram, bits: int) -> float:
    """Scan truncation candidates and return the KL-minimising bin edge."""
    n_levels = 2 ** int(bits)
    counts = hist.counts.astype(np.float64)
    n = counts.size
    if n < n_levels:
        raise ValueError("histogram has fewer bins than quantization levels")
    tail_from = np.concatenate([np.cumsum(counts[::-1])[::-1], [0.0]])
    best_i = n
    best_kl = np.inf
    for i in range(n_levels, n + 1):
        kept = counts[:i]
        p = kept.copy()
        p[i - 1] += tail_from[i]
        nonzero = p > 0
        bounds = np.round(np.linspace(0, i, n_levels + 1)).astype(int)
        group_mass = np.add.reduceat(kept, bounds[:-1])
        group_support = np.add.reduceat(nonzero.astype(np.float64), bounds[:-1])
        fill = np.divide(
            group_mass,
            group_support,
            out=np.zeros_like(group_mass),
            where=group_support > 0,
        )
        q = np.where(nonzero, np.repeat(fill, np.diff(bounds)), 0.0)
        if q.sum() == 0.0:
            continue
        kl = kl_divergence(p, q)
        if kl < best_kl:
            best_kl = kl
            best_i = i
    return float(hist.edges[best_i])
