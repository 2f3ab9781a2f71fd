"""Command-line interface.

Subcommands: optimal-alpha, mse-curve, quantize, compare, kld-compare,
alloc-bits, bias-correct, two-channel-experiment.  Every command is
deterministic given its flags; all randomness flows from --seed (default 42,
recorded in reports for provenance).  Reports are CSV by default or a single
JSON document with --format json; --plot additionally renders a PNG figure
next to the delimited output.

Exit codes: 0 success, 2 usage error, 3 I/O error, 4 numeric or degenerate
input.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from . import analytic, kld, simulation
from .analytic import FUSED_RELU, SYMMETRIC, AciqSetting
from .bias_correction import apply_correction, correction_terms
from .bit_allocation import allocate_bits
from .distributions import FAMILIES, LAPLACE, DistributionModel, estimate_scale, sample
from .pipeline import (
    METHODS,
    ROLES,
    PipelineConfig,
    compare_matrix,
    run_pipeline,
)
from .quantizer import make_grid, empirical_mse
from .reports import write_report
from .tensor_io import NonFiniteError, TensorFileError, read_tensor, write_tensor

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_NUMERIC = 4

DEFAULT_SEED = 42


def _at_least(minimum: int):
    def convert(text: str) -> int:
        value = int(text)
        if value < minimum:
            raise argparse.ArgumentTypeError(f"must be at least {minimum}")
        return value

    return convert


def _add_common(parser, *, family=True, mode=True, seed=True, fmt=True):
    if family:
        parser.add_argument("--family", choices=FAMILIES, default=LAPLACE)
    if mode:
        parser.add_argument("--mode", choices=(SYMMETRIC, FUSED_RELU), default=SYMMETRIC)
    if seed:
        parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    if fmt:
        parser.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aciq",
        description="Analytic clipping, bit allocation and bias correction "
        "for low-bit uniform quantization.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("optimal-alpha", help="closed-form optimal clipping value")
    _add_common(p, seed=False, fmt=False)
    p.add_argument("--bits", type=int, required=True)
    p.add_argument("--scale", type=float, default=1.0)
    p.set_defaults(func=cmd_optimal_alpha)

    p = sub.add_parser("mse-curve", help="analytic vs simulated MSE over a clipping grid")
    _add_common(p)
    p.add_argument("--bits", type=int, required=True)
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--alpha-min", type=float, default=0.5)
    p.add_argument("--alpha-max", type=float, default=10.0)
    p.add_argument("--alpha-step", type=float, default=0.1)
    p.add_argument("--n", type=_at_least(1000), default=10000)
    p.add_argument("--out", required=True)
    p.add_argument("--plot")
    p.set_defaults(func=cmd_mse_curve)

    p = sub.add_parser("quantize", help="quantize a tensor file through a method pipeline")
    p.add_argument("input")
    _add_common(p)
    p.add_argument("--role", choices=ROLES, required=True)
    p.add_argument("--methods", default="", help=f"comma list from {','.join(METHODS)}")
    p.add_argument("--weight-bits", type=int, default=4)
    p.add_argument("--activation-bits", type=int, default=4)
    p.add_argument("--out", required=True, help="quantized tensor file")
    p.add_argument("--report", help="per-channel report file")
    p.add_argument("--plot")
    p.set_defaults(func=cmd_quantize)

    p = sub.add_parser("compare", help="MSE of method combinations on one tensor")
    p.add_argument("input")
    _add_common(p)
    p.add_argument("--bits", type=int, default=4)
    p.add_argument("--methods", default="")
    p.add_argument("--full-matrix", action="store_true", help="all 16 combinations")
    p.add_argument("--out", required=True)
    p.add_argument("--plot")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("kld-compare", help="analytic clipping vs KL-divergence search")
    p.add_argument("input", nargs="?", help="tensor file; omit to sample synthetically")
    _add_common(p, mode=False)
    p.add_argument("--bits", type=int, default=4)
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--n", type=_at_least(1), default=10000)
    p.add_argument("--n-bins", type=_at_least(2), default=kld.DEFAULT_BINS)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_kld_compare)

    p = sub.add_parser("alloc-bits", help="per-channel bit widths under a bin quota")
    _add_common(p, family=False, mode=False, seed=False)
    src_group = p.add_mutually_exclusive_group(required=True)
    src_group.add_argument("--alphas", help="comma-separated per-channel ranges")
    src_group.add_argument("--tensor", help="tensor file; ranges become per-channel max |x|")
    p.add_argument("--avg-bits", type=int, default=4)
    p.add_argument("--min-bits", type=int, default=1)
    p.add_argument("--max-bits", type=int, default=8)
    p.add_argument("--repair", action="store_true", help="greedy strict-budget repair")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_alloc_bits)

    p = sub.add_parser("bias-correct", help="correct a quantized tensor against its original")
    p.add_argument("original")
    p.add_argument("quantized")
    _add_common(p, family=False, mode=False, seed=False)
    p.add_argument("--out", required=True, help="corrected tensor file")
    p.add_argument("--report")
    p.set_defaults(func=cmd_bias_correct)

    p = sub.add_parser(
        "two-channel-experiment", help="exhaustive bin-split search vs the closed form"
    )
    _add_common(p, family=False, mode=False)
    p.add_argument("--alpha-i", type=float, required=True)
    p.add_argument("--alpha-j", type=float, required=True)
    p.add_argument("--quota", type=_at_least(4), default=32)
    p.add_argument("--n", type=_at_least(1), default=100000)
    p.add_argument("--out", required=True)
    p.add_argument("--plot")
    p.set_defaults(func=cmd_two_channel)

    return parser


def cmd_optimal_alpha(args) -> int:
    setting = AciqSetting(DistributionModel(args.family, args.scale), args.bits, args.mode)
    print(f"{analytic.optimal_alpha(setting):.4f}")
    return EXIT_OK


def cmd_mse_curve(args) -> int:
    if args.alpha_step <= 0 or args.alpha_max <= args.alpha_min:
        raise ValueError("alpha grid must be ascending")
    grid = np.arange(args.alpha_min, args.alpha_max + args.alpha_step / 2, args.alpha_step)
    model = DistributionModel(args.family, args.scale)
    curve = simulation.mse_curve(model, args.bits, args.mode, grid, args.n, args.seed)
    rows = [
        {"alpha": float(a), "analytic": float(an), "empirical": float(em)}
        for a, an, em in zip(curve.alphas, curve.analytic, curve.empirical)
    ]
    payload = {
        "family": curve.family,
        "mode": curve.mode,
        "bits": curve.bits,
        "scale": args.scale,
        "n_samples": curve.n_samples,
        "seed": curve.seed,
        "rows": rows,
    }
    write_report(args.out, args.format, ("alpha", "analytic", "empirical"), rows, payload)
    if args.plot:
        from .plots import save_mse_curve_plot

        save_mse_curve_plot(curve, args.plot)
    return EXIT_OK


def _parse_methods(text: str) -> frozenset:
    names = [t.strip() for t in text.split(",") if t.strip()]
    unknown = [n for n in names if n not in METHODS]
    if unknown:
        raise ValueError(f"unknown methods: {unknown}")
    return frozenset(names)


def _pipeline_config(args, methods) -> PipelineConfig:
    return PipelineConfig(
        methods=methods,
        weight_bits=getattr(args, "weight_bits", 4),
        activation_bits=getattr(args, "activation_bits", 4),
        family=args.family,
        mode=args.mode,
        seed=args.seed,
    )


def cmd_quantize(args) -> int:
    tensor = read_tensor(args.input)
    config = _pipeline_config(args, _parse_methods(args.methods))
    result = run_pipeline(tensor, config, args.role)
    write_tensor(result.tensor, args.out)
    for record in result.channels:
        if record.note:
            print(f"warning: channel {record.channel}: {record.note}", file=sys.stderr)
    if args.report:
        fieldnames = ("channel", "bits", "alpha", "mu", "xi", "mse", "n_elements", "seed")
        rows = [
            {
                "channel": r.channel,
                "bits": r.bits,
                "alpha": r.alpha,
                "mu": r.mu,
                "xi": r.xi,
                "mse": r.mse,
                "n_elements": r.n_elements,
            }
            for r in result.channels
        ]
        rows.append(
            {
                "channel": "total",
                "mse": result.total_mse,
                "n_elements": tensor.data.size,
                "seed": result.seed,
            }
        )
        payload = {
            "role": result.role,
            "methods": list(result.methods),
            "seed": result.seed,
            "total_mse": result.total_mse,
            "channels": rows[:-1],
        }
        write_report(args.report, args.format, fieldnames, rows, payload)
    if args.plot:
        from .plots import save_channel_mse_plot

        save_channel_mse_plot(result.channels, args.plot)
    return EXIT_OK


def cmd_compare(args) -> int:
    tensor = read_tensor(args.input)
    methods = _parse_methods(args.methods)
    config = PipelineConfig(
        methods=methods,
        weight_bits=args.bits,
        activation_bits=args.bits,
        family=args.family,
        mode=args.mode,
        seed=args.seed,
    )
    rows = compare_matrix(tensor, config, full=args.full_matrix)
    out_rows = [
        {
            "combination": row.label,
            "total_mse": row.total_mse,
            "per_channel_mean_mse": row.per_channel_mean_mse,
        }
        for row in rows
    ]
    payload = {"bits": args.bits, "seed": args.seed, "rows": out_rows}
    write_report(
        args.out, args.format, ("combination", "total_mse", "per_channel_mean_mse"), out_rows, payload
    )
    if args.plot:
        from .plots import save_compare_plot

        save_compare_plot(rows, args.plot)
    return EXIT_OK


def cmd_kld_compare(args) -> int:
    if args.input:
        samples = read_tensor(args.input).data
    else:
        samples = sample(DistributionModel(args.family, args.scale), args.n, args.seed)

    t0 = time.perf_counter()
    scale = estimate_scale(samples, args.family)
    if scale <= 0:
        raise ValueError("degenerate input: constant samples")
    setting = AciqSetting(DistributionModel(args.family, scale), args.bits, SYMMETRIC)
    aciq_threshold = analytic.optimal_alpha(setting)
    aciq_us = (time.perf_counter() - t0) * 1e6

    t0 = time.perf_counter()
    hist = kld.build_histogram(samples, args.n_bins)
    kld_threshold = kld.kld_threshold(hist, args.bits)
    kld_us = (time.perf_counter() - t0) * 1e6

    naive_threshold = float(np.abs(samples).max())

    def mse_at(threshold: float) -> float:
        return empirical_mse(samples, make_grid(threshold, args.bits))

    rows = [
        {"method": "aciq", "threshold": aciq_threshold, "mse": mse_at(aciq_threshold), "microseconds": aciq_us},
        {"method": "kld", "threshold": kld_threshold, "mse": mse_at(kld_threshold), "microseconds": kld_us},
        {"method": "naive", "threshold": naive_threshold, "mse": mse_at(naive_threshold), "microseconds": 0.0},
    ]
    payload = {"bits": args.bits, "seed": args.seed, "rows": rows}
    write_report(args.out, args.format, ("method", "threshold", "mse", "microseconds"), rows, payload)
    for row in rows:
        print(f"{row['method']}: threshold={row['threshold']:.4f} mse={row['mse']:.6g}")
    return EXIT_OK


def cmd_alloc_bits(args) -> int:
    if args.alphas:
        alphas = np.array([float(t) for t in args.alphas.split(",") if t.strip()])
    else:
        alphas = np.abs(read_tensor(args.tensor).channels()).max(axis=1)
    allocation = allocate_bits(
        alphas,
        args.avg_bits,
        min_bits=args.min_bits,
        max_bits=args.max_bits,
        repair_quota=args.repair,
    )
    rows = [
        {
            "channel": c,
            "alpha": float(allocation.alphas[c]),
            "fractional_bins": float(allocation.fractional_bins[c]),
            "bits": int(allocation.bits[c]),
        }
        for c in range(alphas.size)
    ]
    payload = {
        "quota_bins": allocation.quota_bins,
        "realized_bins": allocation.realized_bins,
        "quota_drift": allocation.quota_drift,
        "rows": rows,
    }
    write_report(args.out, args.format, ("channel", "alpha", "fractional_bins", "bits"), rows, payload)
    print(
        f"quota={allocation.quota_bins:g} realized={allocation.realized_bins} "
        f"drift={allocation.quota_drift:.3f}"
    )
    return EXIT_OK


def cmd_bias_correct(args) -> int:
    original = read_tensor(args.original)
    quantized = read_tensor(args.quantized)
    terms = correction_terms(original, quantized)
    corrected = apply_correction(quantized, terms)
    write_tensor(corrected, args.out)
    if args.report:
        orig = original.channels()
        before = ((orig - quantized.channels()) ** 2).mean(axis=1)
        after = ((orig - corrected.channels()) ** 2).mean(axis=1)
        rows = [
            {
                "channel": c,
                "mu": float(terms.mu[c]),
                "xi": float(terms.xi[c]),
                "mse_before": float(before[c]),
                "mse_after": float(after[c]),
            }
            for c in range(original.n_channels)
        ]
        payload = {"rows": rows}
        write_report(
            args.report, args.format, ("channel", "mu", "xi", "mse_before", "mse_after"), rows, payload
        )
    return EXIT_OK


def cmd_two_channel(args) -> int:
    result = simulation.two_channel_bin_experiment(
        args.alpha_i, args.alpha_j, args.quota, args.n, args.seed
    )
    rows = [{"b_i": bi, "b_j": bj, "mse": mse} for bi, bj, mse in result.mse_table]
    payload = {
        "alpha_i": args.alpha_i,
        "alpha_j": args.alpha_j,
        "quota": args.quota,
        "n": args.n,
        "seed": args.seed,
        "best_split": list(result.best_split),
        "predicted_split": list(result.predicted_split),
        "rows": rows,
    }
    write_report(args.out, args.format, ("b_i", "b_j", "mse"), rows, payload)
    print(
        f"best=({result.best_split[0]},{result.best_split[1]}) "
        f"predicted=({result.predicted_split[0]:.2f},{result.predicted_split[1]:.2f})"
    )
    if args.plot:
        from .plots import save_two_channel_plot

        save_two_channel_plot(result, args.alpha_i, args.alpha_j, args.plot)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NonFiniteError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except TensorFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
