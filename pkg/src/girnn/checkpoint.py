"""Binary checkpoint format for trained networks.

Layout:
  magic bytes ``GIRNN01\\n``
  metadata: u64 line count, then per line a u64 byte length followed by a
    UTF-8 ``key=value`` string
  parameters in declaration order (per layer W, U, b; then predictor weight
    and bias), each as a u64 element count followed by little-endian float32
    values

All integers are little-endian. Metadata records the model dimensions, the
training speckle seed/distribution, the PRNG algorithm, and the gate order,
so a checkpoint is self-describing and its speckle sequence regenerable.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import FormatError
from .lstm import GATE_ORDER, LstmLayerParams, LstmNetwork

MAGIC = b"GIRNN01\n"


def save_checkpoint(net: LstmNetwork, path: str | Path) -> None:
    pixel_count = net.output_size
    meta = {
        "hidden_size": net.hidden_size,
        "layer_count": len(net.layers),
        "pixel_count": pixel_count,
        "gate_order": GATE_ORDER,
    }
    for key in ("speckle_seed", "speckle_distribution", "prng"):
        if key in net.meta:
            meta[key] = net.meta[key]
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<Q", len(meta)))
        for key, value in meta.items():
            line = f"{key}={value}".encode("utf-8")
            f.write(struct.pack("<Q", len(line)))
            f.write(line)
        for _, arr in net.param_arrays():
            f.write(struct.pack("<Q", arr.size))
            f.write(arr.astype("<f4").tobytes())


def _read_exact(f, n: int, what: str) -> bytes:
    data = f.read(n)
    if len(data) != n:
        raise FormatError(f"truncated checkpoint while reading {what}", offset=f.tell())
    return data


def load_checkpoint(path: str | Path) -> LstmNetwork:
    with open(path, "rb") as f:
        magic = f.read(len(MAGIC))
        if magic != MAGIC:
            raise FormatError(f"bad checkpoint magic {magic!r}", offset=0)
        (line_count,) = struct.unpack("<Q", _read_exact(f, 8, "metadata count"))
        meta: dict[str, str] = {}
        for _ in range(line_count):
            (length,) = struct.unpack("<Q", _read_exact(f, 8, "metadata length"))
            line = _read_exact(f, length, "metadata line").decode("utf-8")
            key, _, value = line.partition("=")
            meta[key] = value
        try:
            hidden = int(meta["hidden_size"])
            layer_count = int(meta["layer_count"])
            pixel_count = int(meta["pixel_count"])
        except KeyError as e:
            raise FormatError(f"checkpoint metadata missing {e}") from e
        input_size = pixel_count + 1

        def read_array(shape: tuple[int, ...], what: str) -> np.ndarray:
            expected = int(np.prod(shape))
            (count,) = struct.unpack("<Q", _read_exact(f, 8, f"{what} count"))
            if count != expected:
                raise FormatError(
                    f"{what}: expected {expected} elements, file says {count}",
                    offset=f.tell() - 8,
                )
            raw = _read_exact(f, 4 * count, what)
            return np.frombuffer(raw, dtype="<f4").astype(np.float64).reshape(shape)

        layers = []
        for l in range(layer_count):
            in_dim = input_size if l == 0 else hidden
            layers.append(
                LstmLayerParams(
                    read_array((4 * hidden, in_dim), f"layer {l} input weights"),
                    read_array((4 * hidden, hidden), f"layer {l} recurrent weights"),
                    read_array((4 * hidden,), f"layer {l} biases"),
                )
            )
        pw = read_array((pixel_count, hidden), "predictor weight")
        pb = read_array((pixel_count,), "predictor bias")

    net_meta: dict = {"prng": meta.get("prng", ""), "pixel_count": pixel_count}
    if "speckle_seed" in meta:
        net_meta["speckle_seed"] = int(meta["speckle_seed"])
    if "speckle_distribution" in meta:
        net_meta["speckle_distribution"] = meta["speckle_distribution"]
    return LstmNetwork(
        layers=layers, predictor_weight=pw, predictor_bias=pb, meta=net_meta
    )
