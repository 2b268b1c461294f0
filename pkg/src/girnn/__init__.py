"""Desk-scale computational ghost imaging toolkit.

Simulates speckle-illumination measurements of small images and
reconstructs targets three ways: classical correlation, FISTA sparse
recovery, and a stacked-LSTM reconstructor trained from scratch.
"""

from .bench import (
    BenchReport,
    ExperimentConfig,
    emit_artifacts,
    psnr,
    run_method_comparison,
    run_rate_sweep,
    write_pgm,
)
from .checkpoint import load_checkpoint, save_checkpoint
from .correlation import correlate, normalize_minmax, reconstruct_correlation
from .dataset import (
    MnistSet,
    build_sequences,
    handwritten_digit_corpus,
    load_mnist_idx,
    select_test_targets,
    select_training_subset,
    write_idx,
)
from .errors import FormatError, NumericalError
from .fista import CsProblem, fista_reconstruct, lipschitz_estimate, soft_threshold
from .imaging import (
    ImageTensor,
    MeasurementSequence,
    SpecklePattern,
    SpeckleSequence,
    bucket_signal,
    generate_speckles,
    measure_sequence,
    sampling_count,
)
from .lstm import (
    LstmLayerParams,
    LstmNetwork,
    backward,
    encode_sequence,
    encode_step,
    forward,
    forward_batch,
    gradient_check,
    init_network,
    lstm_cell_forward,
    mse_loss,
    reference_forward,
)
from .optim import AdamState, adam_step, adam_step_network
from .training import TrainConfig, reference_scale_config, predict_image, train

__version__ = "0.1.0"
