"""Mini-batch training of the recurrent reconstructor on fixed-speckle data.

Every sample in a dataset shares one speckle sequence; only the bucket
values differ. Batches therefore share the speckle part of each step input
and are assembled on the fly, which keeps memory flat for large datasets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imaging import ImageTensor, MeasurementSequence
from .lstm import (
    LstmNetwork,
    backward,
    encode_sequence,
    forward,
    forward_batch,
    init_network,
    mse_loss,
)
from .optim import AdamState, adam_step_network

PRNG_NAME = "numpy-pcg64"


@dataclass(frozen=True)
class TrainConfig:
    """Model scale plus optimizer and loop settings; all seeds explicit."""

    hidden_size: int = 256
    layer_count: int = 2
    epochs: int = 20
    batch_size: int = 32
    learning_rate: float = 0.0001
    weight_decay: float = 0.0
    init_seed: int = 0
    shuffle_seed: int = 1
    deterministic: bool = True


def reference_scale_config(**overrides) -> TrainConfig:
    """Full-scale settings: 5 layers, hidden 1024, lr 1e-4, no weight decay."""
    base = dict(hidden_size=1024, layer_count=5, epochs=50)
    base.update(overrides)
    return TrainConfig(**base)


def _check_shared_speckles(dataset) -> MeasurementSequence:
    first = dataset[0][0]
    for seq, _ in dataset[1:]:
        if (
            seq.speckles.seed != first.speckles.seed
            or seq.speckles.distribution != first.speckles.distribution
            or len(seq) != len(first)
        ):
            raise ValueError("all samples must share one fixed speckle sequence")
    return first


def train(
    dataset: list[tuple[MeasurementSequence, np.ndarray]],
    config: TrainConfig,
) -> tuple[LstmNetwork, list[tuple[int, float]]]:
    """Train from scratch; returns the network and per-epoch mean loss history.

    Samples are shuffled each epoch by a generator seeded with shuffle_seed;
    per-batch gradients are the mean over the batch. Runs are reproducible
    from (init_seed, shuffle_seed) and the dataset.
    """
    if not dataset:
        raise ValueError("dataset is empty")
    first = _check_shared_speckles(dataset)
    steps = len(first)
    pixel_count = first.speckles.height * first.speckles.width
    input_size = pixel_count + 1

    speckle_flat = first.speckles.stack.reshape(steps, pixel_count)
    buckets = np.stack([seq.buckets for seq, _ in dataset]) / pixel_count
    truths = np.stack([np.asarray(t, dtype=np.float64).reshape(-1) for _, t in dataset])
    if truths.shape[1] != pixel_count:
        raise ValueError(f"truth length {truths.shape[1]} != pixel count {pixel_count}")

    net = init_network(
        config.hidden_size, config.layer_count, input_size, pixel_count, config.init_seed
    )
    net.meta.update(
        speckle_seed=first.speckles.seed,
        speckle_distribution=first.speckles.distribution,
        pixel_count=pixel_count,
        prng=PRNG_NAME,
    )
    adam = AdamState.for_params(
        [arr for _, arr in net.param_arrays()],
        learning_rate=config.learning_rate,
        weight_decay=config.weight_decay,
    )

    n = len(dataset)
    rng = np.random.Generator(np.random.PCG64(config.shuffle_seed))
    history: list[tuple[int, float]] = []
    batch_X = np.empty((min(config.batch_size, n), steps, input_size))
    batch_X[:, :, :pixel_count] = speckle_flat
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        total, seen = 0.0, 0
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            X = batch_X[: idx.size]
            if idx.size != batch_X.shape[0]:
                X = np.empty((idx.size, steps, input_size))
                X[:, :, :pixel_count] = speckle_flat
            X[:, :, pixel_count] = buckets[idx]
            truth = truths[idx]
            pred, cache = forward_batch(net, X)
            loss = mse_loss(pred, truth)
            grads = backward(net, cache, truth)
            net, adam = adam_step_network(net, grads, adam)
            total += loss * idx.size
            seen += idx.size
        history.append((epoch, total / seen))
    return net, history


def predict_image(net: LstmNetwork, measurements: MeasurementSequence) -> ImageTensor:
    """Reconstruct one target: forward pass, clip to [0, 1], reshape to 2-D.

    Refuses measurements whose speckle seed differs from the one the network
    was trained with; the method only works under the training illumination.
    """
    if len(measurements) == 0:
        raise ValueError("measurement sequence is empty")
    trained_seed = net.meta.get("speckle_seed")
    if trained_seed is not None and measurements.speckles.seed != trained_seed:
        raise ValueError(
            f"speckle seed {measurements.speckles.seed} does not match "
            f"training seed {trained_seed}"
        )
    pred, _ = forward(net, encode_sequence(measurements))
    h, w = measurements.speckles.height, measurements.speckles.width
    return ImageTensor(np.clip(pred, 0.0, 1.0).reshape(h, w))
