"""Shallow Fourier-feature models with Metropolis-sampled frequencies.

Amplitudes are fit by regularized complex least squares; frequencies are
sampled by an adaptive random-walk Metropolis scheme driven by the amplitude
moduli, with an optional learned proposal covariance.
"""

from . import errors
from .baselines import (
    FixedRffConfig,
    SgdConfig,
    sgd_gradients,
    sgd_loss,
    train_fixed_rff,
    train_sgd,
)
from .core import (
    Activation,
    Dataset,
    FourierModel,
    NormalizationStats,
    apply_normalization,
    augment_bias,
    build_design_matrix,
    denormalize_dataset,
    normalize_dataset,
    predict,
)
from .data_io import (
    ExperimentConfig,
    IdxHeader,
    ResultRow,
    default_config,
    default_sweep_config,
    dump_config,
    load_config,
    load_mnist,
    loads_config,
    parse_k_grid,
    read_idx,
    read_results,
    write_idx,
    write_results,
)
from .experiments import (
    ErrorBar,
    TargetFunction,
    aggregate_error_bars,
    case_target,
    classification_scores,
    error_bars,
    fft_fhat_magnitude,
    frequency_density,
    gauss_target,
    generalization_error,
    generate_dataset,
    misclassification_rate,
    run_case3,
    run_single,
    sine_integral,
    sweep_k,
    sweep_sigma_omega,
)
from .sampler import (
    AdaptiveCovConfig,
    RunningCovariance,
    SamplerConfig,
    TrainTrace,
    covariance_update,
    metropolis_accept,
    propose,
    train,
)
from .solver import SolveOptions, solve_amplitudes

__version__ = "0.1.0"
