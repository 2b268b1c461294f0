"""Classical correlation reconstruction.

The estimate is the bucket-weighted sum of the illumination patterns,
T(x, y) = sum_i P_i(x, y) * B_i, with no mean subtraction.
"""

from __future__ import annotations

import numpy as np

from .imaging import ImageTensor, MeasurementSequence


def correlate(measurements: MeasurementSequence) -> np.ndarray:
    """Raw (unnormalized) correlation image; shape equals the speckle shape."""
    if len(measurements) == 0:
        raise ValueError("measurement sequence is empty")
    stack = measurements.speckles.stack
    # accumulate in measurement order so the result is bit-identical to a
    # per-pixel sequential sum over i
    out = np.zeros(stack.shape[1:])
    for pattern, bucket in zip(stack, measurements.buckets):
        out += pattern * bucket
    return out


def normalize_minmax(raw: np.ndarray) -> ImageTensor:
    """Affine rescale of a raw grid onto [0, 1]; constant grids map to zeros."""
    raw = np.asarray(raw, dtype=np.float64)
    if raw.ndim != 2 or raw.size == 0:
        raise ValueError(f"expected non-empty 2-D grid, got shape {raw.shape}")
    lo, hi = raw.min(), raw.max()
    if hi > lo:
        return ImageTensor((raw - lo) / (hi - lo))
    return ImageTensor(np.zeros_like(raw))


def reconstruct_correlation(measurements: MeasurementSequence) -> ImageTensor:
    """Correlation image rescaled onto [0, 1] for metric comparison."""
    return normalize_minmax(correlate(measurements))
