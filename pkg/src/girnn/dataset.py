"""MNIST-style data: IDX parsing, subset selection, and measurement building.

The IDX container is the published big-endian format: 32-bit header words
(magic, count, rows, cols for images; magic, count for labels) followed by
raw uint8 payload. Pixel bytes map to [0, 1] by division with 255.

When the real MNIST files are not on disk, ``handwritten_digit_corpus``
provides 28x28 grayscale handwritten digits (the classic 8x8 digits corpus
upscaled) with the same value conventions, so every pipeline runs offline.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FormatError
from .imaging import ImageTensor, MeasurementSequence, SpeckleSequence, sampling_count

IMAGE_MAGIC = 2051
LABEL_MAGIC = 2049


@dataclass(frozen=True)
class MnistSet:
    """Parallel lists of images and digit labels."""

    images: list[ImageTensor]
    labels: list[int]

    def __post_init__(self):
        if len(self.images) != len(self.labels):
            raise ValueError(
                f"{len(self.images)} images but {len(self.labels)} labels"
            )

    def __len__(self) -> int:
        return len(self.images)


def _read_be32(f, what: str) -> int:
    offset = f.tell()
    data = f.read(4)
    if len(data) != 4:
        raise FormatError(f"truncated file while reading {what}", offset=offset)
    return struct.unpack(">i", data)[0]


def load_mnist_idx(image_path: str | Path, label_path: str | Path) -> MnistSet:
    """Parse an IDX image/label file pair into a normalized MnistSet."""
    with open(image_path, "rb") as f:
        magic = _read_be32(f, "image magic")
        if magic != IMAGE_MAGIC:
            raise FormatError(
                f"bad image magic {magic:#010x}, expected {IMAGE_MAGIC}", offset=0
            )
        count = _read_be32(f, "image count")
        rows = _read_be32(f, "row count")
        cols = _read_be32(f, "column count")
        payload = f.read(count * rows * cols)
        if len(payload) != count * rows * cols:
            raise FormatError(
                f"image payload holds {len(payload)} bytes, "
                f"header promises {count * rows * cols}",
                offset=16,
            )
    pixels = np.frombuffer(payload, dtype=np.uint8).reshape(count, rows, cols)

    with open(label_path, "rb") as f:
        magic = _read_be32(f, "label magic")
        if magic != LABEL_MAGIC:
            raise FormatError(
                f"bad label magic {magic:#010x}, expected {LABEL_MAGIC}", offset=0
            )
        label_count = _read_be32(f, "label count")
        label_bytes = f.read(label_count)
        if len(label_bytes) != label_count:
            raise FormatError(
                f"label payload holds {len(label_bytes)} bytes, "
                f"header promises {label_count}",
                offset=8,
            )
    if label_count != count:
        raise FormatError(
            f"image file holds {count} items but label file holds {label_count}"
        )
    images = [ImageTensor(img / 255.0) for img in pixels]
    labels = [int(b) for b in label_bytes]
    return MnistSet(images=images, labels=labels)


def write_idx(dataset: MnistSet, image_path: str | Path, label_path: str | Path) -> None:
    """Serialize a MnistSet back into the IDX pair (inverse of load_mnist_idx)."""
    if len(dataset) == 0:
        raise ValueError("cannot write an empty dataset")
    rows = dataset.images[0].height
    cols = dataset.images[0].width
    with open(image_path, "wb") as f:
        f.write(struct.pack(">iiii", IMAGE_MAGIC, len(dataset), rows, cols))
        for img in dataset.images:
            f.write(np.round(img.data * 255.0).astype(np.uint8).tobytes())
    with open(label_path, "wb") as f:
        f.write(struct.pack(">ii", LABEL_MAGIC, len(dataset)))
        f.write(bytes(dataset.labels))


def select_training_subset(dataset: MnistSet, count: int, seed: int) -> MnistSet:
    """Seeded uniform sample without replacement, order randomized."""
    if not 1 <= count <= len(dataset):
        raise ValueError(f"subset size {count} outside [1, {len(dataset)}]")
    rng = np.random.Generator(np.random.PCG64(seed))
    idx = rng.choice(len(dataset), size=count, replace=False)
    return MnistSet(
        images=[dataset.images[i] for i in idx],
        labels=[dataset.labels[i] for i in idx],
    )


def select_test_targets(dataset: MnistSet, seed: int, per_class: int = 1) -> MnistSet:
    """One seeded pick per digit class (where present), labels ascending."""
    rng = np.random.Generator(np.random.PCG64(seed))
    images, labels = [], []
    for digit in range(10):
        pool = [i for i, lab in enumerate(dataset.labels) if lab == digit]
        if not pool:
            continue
        for i in rng.choice(pool, size=min(per_class, len(pool)), replace=False):
            images.append(dataset.images[i])
            labels.append(digit)
    return MnistSet(images=images, labels=labels)


def build_sequences(
    subset: MnistSet,
    speckles: SpeckleSequence,
    rate: float,
) -> list[tuple[MeasurementSequence, np.ndarray]]:
    """Measure every image against the first sampling_count(rate) speckles.

    Lower rates reuse a prefix of the same fixed sequence, so datasets at
    different rates are measurement-prefixes of one another.
    """
    if len(subset) == 0:
        raise ValueError("subset is empty")
    pixel_count = speckles.height * speckles.width
    n = sampling_count(rate, pixel_count)
    if n > len(speckles):
        raise ValueError(
            f"rate {rate} needs {n} speckles but the sequence holds {len(speckles)}"
        )
    prefix = speckles.prefix(n)
    flat = prefix.stack.reshape(n, pixel_count)
    out = []
    for img, label in zip(subset.images, subset.labels):
        truth = img.flatten()
        buckets = flat @ truth
        out.append(
            (MeasurementSequence(prefix, buckets, target_id=str(label)), truth)
        )
    return out


def handwritten_digit_corpus(background_cut: float = 0.25) -> MnistSet:
    """Offline 28x28 handwritten-digit corpus built from sklearn's digits.

    The 8x8 grayscale digits are bilinearly upscaled to a 20x20 content box
    inside a 28x28 canvas (4-pixel margins) and the faint interpolation halo
    below ``background_cut`` is squashed to zero, which restores the dark
    background and stroke sparsity of full-resolution handwriting scans.
    1797 samples, labels 0-9.
    """
    from scipy.ndimage import zoom
    from sklearn.datasets import load_digits

    X, y = load_digits(return_X_y=True)
    images = []
    for row in X:
        img = zoom(row.reshape(8, 8) / 16.0, 20 / 8, order=1)
        img = np.clip((img - background_cut) / (1.0 - background_cut), 0.0, 1.0)
        images.append(ImageTensor(np.pad(img, 4)))
    return MnistSet(images=images, labels=[int(v) for v in y])
