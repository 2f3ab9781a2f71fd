"""Post-training quantization toolkit: analytic clipping, per-channel bit
allocation and bias correction for low-bit uniform quantization, with a
deterministic simulation harness for every closed form."""

from .analytic import (
    FUSED_RELU,
    SYMMETRIC,
    AciqSetting,
    clip_noise,
    erf,
    mse,
    mse_derivative,
    optimal_alpha,
    rounding_noise_pwl,
    rounding_noise_uniform,
)
from .bias_correction import (
    CorrectionTerms,
    apply_correction,
    correction_terms,
    fold_correction,
)
from .bit_allocation import BitAllocation, allocate_bins, allocate_bits, allocation_mse
from .distributions import (
    GAUSSIAN,
    LAPLACE,
    DistributionModel,
    center,
    estimate_gaussian_sigma,
    estimate_laplace_b,
    pdf,
    sample,
)
from .kld import Histogram, build_histogram, kld_threshold
from .pipeline import (
    METHODS,
    PipelineConfig,
    QuantizationResult,
    compare_matrix,
    quantize_activations,
    quantize_weights,
    run_pipeline,
)
from .quantizer import (
    UNSIGNED,
    ChannelTensor,
    QuantGrid,
    clip,
    empirical_mse,
    make_grid,
    make_grid_levels,
    quantize,
    quantize_minmax_channel,
)
from .simulation import (
    MseCurve,
    TwoChannelResult,
    brute_force_bin_allocation,
    empirical_argmin,
    model_empirical_mse,
    model_error,
    mse_curve,
    two_channel_bin_experiment,
)
from .tensor_io import (
    BadMagicError,
    HeaderError,
    NonFiniteError,
    PayloadMismatchError,
    TensorFileError,
    read_tensor,
    write_tensor,
)

__version__ = "0.1.0"
