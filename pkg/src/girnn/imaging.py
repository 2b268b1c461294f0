"""Images, speckle patterns, and the forward measurement model.

A measurement illuminates a target with one structured pattern and records
the total transmitted intensity as a single scalar (the "bucket" value).
All values are float64; all operations are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

DISTRIBUTIONS = ("binary", "uniform")


def _check_grid(data: np.ndarray, name: str) -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"{name} must be a non-empty 2-D grid, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class ImageTensor:
    """2-D intensity grid with values in [0, 1]."""

    data: np.ndarray

    def __post_init__(self):
        arr = _check_grid(self.data, "image")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError("image values must lie in [0, 1]")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def pixel_count(self) -> int:
        return self.data.size

    def flatten(self) -> np.ndarray:
        """Row-major flat view, length height*width."""
        return self.data.reshape(-1)

    @staticmethod
    def from_flat(vector: np.ndarray, height: int, width: int) -> "ImageTensor":
        vector = np.asarray(vector, dtype=np.float64)
        if vector.size != height * width:
            raise ValueError(f"cannot reshape {vector.size} values to {height}x{width}")
        return ImageTensor(vector.reshape(height, width))


@dataclass(frozen=True)
class SpecklePattern:
    """One illumination frame; same shape rules as ImageTensor, no range cap."""

    data: np.ndarray

    def __post_init__(self):
        arr = _check_grid(self.data, "speckle")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def pixel_count(self) -> int:
        return self.data.size


@dataclass(frozen=True)
class SpeckleSequence:
    """Ordered stack of patterns, reproducible from (seed, count, shape, distribution).

    ``stack`` has shape (count, height, width). Generated with numpy's PCG64
    generator; the algorithm name is recorded in checkpoints so sequences can
    be regenerated bit-for-bit.
    """

    stack: np.ndarray
    seed: int
    distribution: str

    def __post_init__(self):
        arr = np.asarray(self.stack, dtype=np.float64)
        if arr.ndim != 3 or arr.shape[0] == 0 or arr.shape[1] == 0 or arr.shape[2] == 0:
            raise ValueError(f"speckle stack must be non-empty 3-D, got shape {arr.shape}")
        if self.distribution not in DISTRIBUTIONS:
            raise ValueError(f"unknown distribution {self.distribution!r}")
        arr.flags.writeable = False
        object.__setattr__(self, "stack", arr)

    def __len__(self) -> int:
        return self.stack.shape[0]

    def __getitem__(self, i: int) -> SpecklePattern:
        return SpecklePattern(self.stack[i])

    @property
    def height(self) -> int:
        return self.stack.shape[1]

    @property
    def width(self) -> int:
        return self.stack.shape[2]

    def prefix(self, count: int) -> "SpeckleSequence":
        """First ``count`` patterns, keeping seed and distribution tags."""
        if not 1 <= count <= len(self):
            raise ValueError(f"prefix length {count} outside [1, {len(self)}]")
        return SpeckleSequence(self.stack[:count], self.seed, self.distribution)


@dataclass(frozen=True)
class MeasurementSequence:
    """Speckle patterns paired with their recorded bucket values."""

    speckles: SpeckleSequence
    buckets: np.ndarray
    target_id: str | None = field(default=None)

    def __post_init__(self):
        b = np.asarray(self.buckets, dtype=np.float64)
        if b.ndim != 1:
            raise ValueError("buckets must be a 1-D vector")
        if b.size != len(self.speckles):
            raise ValueError(
                f"bucket count {b.size} != speckle count {len(self.speckles)}"
            )
        if not np.all(np.isfinite(b)):
            raise ValueError("bucket values must be finite")
        b.flags.writeable = False
        object.__setattr__(self, "buckets", b)

    def __len__(self) -> int:
        return self.buckets.size

    def prefix(self, count: int) -> "MeasurementSequence":
        return MeasurementSequence(
            self.speckles.prefix(count), self.buckets[:count], self.target_id
        )


def generate_speckles(
    seed: int,
    count: int,
    height: int,
    width: int,
    distribution: str = "binary",
) -> SpeckleSequence:
    """Draw ``count`` i.i.d. random patterns from a seeded PCG64 stream.

    binary: each pixel is 1 with probability 0.5, else 0.
    uniform: each pixel is drawn from [0, 1).
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if height < 1 or width < 1:
        raise ValueError("pattern shape must be at least 1x1")
    if distribution not in DISTRIBUTIONS:
        raise ValueError(f"unknown distribution {distribution!r}")
    rng = np.random.Generator(np.random.PCG64(seed))
    draws = rng.random((count, height, width))
    if distribution == "binary":
        stack = (draws < 0.5).astype(np.float64)
    else:
        stack = draws
    return SpeckleSequence(stack, seed=seed, distribution=distribution)


def bucket_signal(speckle: SpecklePattern, target: ImageTensor) -> float:
    """Total intensity behind the target: sum over pixels of speckle * target."""
    if speckle.data.shape != target.data.shape:
        raise ValueError(
            f"speckle shape {speckle.data.shape} != target shape {target.data.shape}"
        )
    return float(np.sum(speckle.data * target.data))


def measure_sequence(speckles: SpeckleSequence, target: ImageTensor) -> MeasurementSequence:
    """Bucket value for every pattern in order."""
    if speckles.stack.shape[1:] != target.data.shape:
        raise ValueError(
            f"speckle shape {speckles.stack.shape[1:]} != target shape {target.data.shape}"
        )
    buckets = np.tensordot(speckles.stack, target.data, axes=2)
    return MeasurementSequence(speckles, buckets)


def sampling_count(rate: float, pixel_count: int) -> int:
    """Illumination count for a sampling rate: round-half-up, floor 1."""
    if not 0.0 < rate <= 1.0:
        raise ValueError(f"sampling rate must be in (0, 1], got {rate}")
    if pixel_count < 1:
        raise ValueError("pixel_count must be >= 1")
    return max(1, math.floor(rate * pixel_count + 0.5))
