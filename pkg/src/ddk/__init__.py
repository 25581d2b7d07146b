"""Discrete-step diffusion-like generative processes on 2-D grids.

Five closed-form forward (noising) processes, two iterative samplers, and
clean-data MSE training of a small convolutional restorer, all operating on
W x H float grids (time frames by frequency bins).
"""

from .config import ProcessConfig, ProcessKind
from .dctblur import blur, dct2_forward, dct2_inverse, heat_eigenvalues
from .grids import MelGrid, as_grid
from .metrics import MetricReport, evaluate_predictions, hf_energy, mc_moments, rmse
from .processes import (
    BetaSchedule,
    blurring_path,
    corrupt,
    grad_tts_dt,
    mixture_noise,
    mixture_path,
    noising,
    rfag,
    rfmg,
    schedule_of,
)
from .restorer import (
    ConvRestorer,
    LinearRidgeModel,
    OracleRestorer,
    Restorer,
    conv_backward,
    conv_forward,
    load_model,
    ridge_fit,
    save_model,
)
from .rng import NoiseDraw, RandomSource, draw_noise, seeded_rng
from .sampler import (
    Algorithm,
    NoiseMode,
    NonFiniteStateError,
    SamplerConfig,
    default_algorithm,
    sample,
    sample_alg1,
    sample_alg2,
)
from .trainer import (
    AdamOptimizer,
    SyntheticDatasetSpec,
    TrainConfig,
    evaluate_loss,
    make_synthetic_dataset,
    train_loop,
    train_step,
    write_loss_history,
)

__version__ = "0.1.0"

__all__ = [
    "Algorithm",
    "AdamOptimizer",
    "BetaSchedule",
    "ConvRestorer",
    "LinearRidgeModel",
    "MelGrid",
    "MetricReport",
    "NoiseDraw",
    "NoiseMode",
    "NonFiniteStateError",
    "OracleRestorer",
    "ProcessConfig",
    "ProcessKind",
    "RandomSource",
    "Restorer",
    "SamplerConfig",
    "SyntheticDatasetSpec",
    "TrainConfig",
    "as_grid",
    "blur",
    "blurring_path",
    "conv_backward",
    "conv_forward",
    "corrupt",
    "dct2_forward",
    "dct2_inverse",
    "default_algorithm",
    "draw_noise",
    "evaluate_loss",
    "evaluate_predictions",
    "grad_tts_dt",
    "heat_eigenvalues",
    "hf_energy",
    "load_model",
    "make_synthetic_dataset",
    "mc_moments",
    "mixture_noise",
    "mixture_path",
    "noising",
    "rfag",
    "rfmg",
    "ridge_fit",
    "rmse",
    "sample",
    "sample_alg1",
    "sample_alg2",
    "save_model",
    "schedule_of",
    "seeded_rng",
    "train_loop",
    "train_step",
    "write_loss_history",
]
