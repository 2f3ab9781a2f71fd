"""Figure rendering for the report paths (PNG files, Agg backend)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .simulation import MseCurve, TwoChannelResult


def save_mse_curve_plot(curve: MseCurve, path) -> None:
    """Analytic curve with simulated points, MSE against clipping value."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.plot(curve.alphas, curve.analytic, "-", color="tab:red", label="analytic")
    ax.plot(
        curve.alphas,
        curve.empirical,
        ".",
        color="tab:blue",
        markersize=4,
        label="simulation",
    )
    ax.set_xlabel("clipping value")
    ax.set_ylabel("mean square error")
    ax.set_title(f"{curve.family}, {curve.bits}-bit ({curve.mode})")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_two_channel_plot(
    result: TwoChannelResult, alpha_i: float, alpha_j: float, path
) -> None:
    """Summed MSE against the first channel's bin count, with the empirically
    best and closed-form splits marked."""
    b_i = [row[0] for row in result.mse_table]
    mse = [row[2] for row in result.mse_table]
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.plot(b_i, mse, ".-", color="tab:blue")
    ax.axvline(result.best_split[0], color="tab:green", label="best measured")
    ax.axvline(
        result.predicted_split[0], color="tab:red", linestyle="--", label="closed form"
    )
    ax.set_xlabel(f"bins for channel i (alpha_i={alpha_i:g}, alpha_j={alpha_j:g})")
    ax.set_ylabel("summed mean square error")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_compare_plot(rows, path) -> None:
    """Total MSE per method combination, as a horizontal bar chart."""
    labels = [row.label for row in rows]
    values = [row.total_mse for row in rows]
    fig, ax = plt.subplots(figsize=(7.2, 0.35 * len(rows) + 1.5))
    ax.barh(range(len(rows)), values, color="tab:blue")
    ax.set_yticks(range(len(rows)))
    ax.set_yticklabels(labels, fontsize=8)
    ax.invert_yaxis()
    ax.set_xlabel("total mean square error")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_channel_mse_plot(records, path) -> None:
    """Per-channel MSE bars from a quantization report."""
    channels = [r.channel for r in records]
    values = [r.mse for r in records]
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.bar(channels, values, color="tab:blue")
    ax.set_xlabel("channel")
    ax.set_ylabel("mean square error")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
