"""Stacked LSTM that consumes one (speckle, bucket) pair per time step.

Each measurement becomes a step input: the flattened pattern followed by the
bucket value scaled by 1/pixel_count. The top layer's hidden state at the
final step is decoded by a linear predictor into the flat image. Gate order
inside every fused weight block is [input, forget, candidate, output].

Forward and backward are batched: sequences stack to (batch, steps, input)
arrays. All math is float64 so analytic gradients can be checked against
central finite differences to tight tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .errors import NumericalError
from .imaging import MeasurementSequence, SpecklePattern

GATE_ORDER = "ifgo"


@dataclass
class LstmLayerParams:
    """One layer's fused parameters: W (4H, in_dim), U (4H, H), b (4H,)."""

    W: np.ndarray
    U: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        four_h = self.W.shape[0]
        if four_h % 4 != 0 or self.U.shape != (four_h, four_h // 4) or self.b.shape != (four_h,):
            raise ValueError(
                f"inconsistent layer shapes W{self.W.shape} U{self.U.shape} b{self.b.shape}"
            )
        for arr in (self.W, self.U, self.b):
            if not np.all(np.isfinite(arr)):
                raise ValueError("layer parameters must be finite")

    @property
    def hidden_size(self) -> int:
        return self.W.shape[0] // 4

    @property
    def input_size(self) -> int:
        return self.W.shape[1]


@dataclass
class LstmNetwork:
    """Layer stack plus the linear predictor mapping h_final to the image."""

    layers: list[LstmLayerParams]
    predictor_weight: np.ndarray
    predictor_bias: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.layers:
            raise ValueError("need at least one LSTM layer")
        h = self.layers[0].hidden_size
        for i, layer in enumerate(self.layers):
            if layer.hidden_size != h:
                raise ValueError("all layers must share one hidden size")
            expected_in = self.input_size if i == 0 else h
            if layer.input_size != expected_in:
                raise ValueError(
                    f"layer {i} input size {layer.input_size}, expected {expected_in}"
                )
        if self.predictor_weight.shape[1] != h:
            raise ValueError("predictor input dim must equal hidden size")
        if self.predictor_bias.shape != (self.predictor_weight.shape[0],):
            raise ValueError("predictor bias shape mismatch")

    @property
    def hidden_size(self) -> int:
        return self.layers[0].hidden_size

    @property
    def input_size(self) -> int:
        return self.layers[0].input_size

    @property
    def output_size(self) -> int:
        return self.predictor_weight.shape[0]

    def param_arrays(self) -> list[tuple[str, np.ndarray]]:
        """All parameters in declaration order (layer W/U/b, then predictor)."""
        out = []
        for i, layer in enumerate(self.layers):
            out.append((f"layer{i}.W", layer.W))
            out.append((f"layer{i}.U", layer.U))
            out.append((f"layer{i}.b", layer.b))
        out.append(("predictor.weight", self.predictor_weight))
        out.append(("predictor.bias", self.predictor_bias))
        return out


@dataclass
class LstmGradients:
    """Same layout as the network parameters."""

    layers: list[LstmLayerParams]
    predictor_weight: np.ndarray
    predictor_bias: np.ndarray

    def param_arrays(self) -> list[np.ndarray]:
        out = []
        for layer in self.layers:
            out.extend([layer.W, layer.U, layer.b])
        out.extend([self.predictor_weight, self.predictor_bias])
        return out


@dataclass
class ForwardCache:
    """Per-step activations retained for backpropagation through time."""

    inputs: np.ndarray   # (B, T, D)
    gates_i: np.ndarray  # (T, L, B, H)
    gates_f: np.ndarray
    gates_g: np.ndarray
    gates_o: np.ndarray
    hidden: np.ndarray   # (T, L, B, H)
    cell: np.ndarray     # (T, L, B, H)
    prediction: np.ndarray  # (B, out)


def encode_step(speckle: SpecklePattern, bucket: float, pixel_count: int) -> np.ndarray:
    """[flattened speckle, bucket/pixel_count]; length pixel_count + 1."""
    if speckle.pixel_count != pixel_count:
        raise ValueError(
            f"speckle has {speckle.pixel_count} pixels, expected {pixel_count}"
        )
    return np.concatenate([speckle.data.reshape(-1), [bucket / pixel_count]])


def encode_sequence(measurements: MeasurementSequence) -> np.ndarray:
    """Stack every measurement into a (steps, pixel_count + 1) array."""
    if len(measurements) == 0:
        raise ValueError("measurement sequence is empty")
    stack = measurements.speckles.stack
    n, h, w = stack.shape
    flat = stack.reshape(n, h * w)
    scaled = measurements.buckets[:, None] / (h * w)
    return np.concatenate([flat, scaled], axis=1)


def lstm_cell_forward(
    params: LstmLayerParams,
    x: np.ndarray,
    h_prev: np.ndarray,
    c_prev: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Single-step cell update; inputs are 1-D vectors, nothing is mutated."""
    H = params.hidden_size
    if x.shape != (params.input_size,) or h_prev.shape != (H,) or c_prev.shape != (H,):
        raise ValueError("cell input dimensions inconsistent with layer parameters")
    z = params.W @ x + params.U @ h_prev + params.b
    i = expit(z[:H])
    f = expit(z[H:2 * H])
    g = np.tanh(z[2 * H:3 * H])
    o = expit(z[3 * H:])
    c = f * c_prev + i * g
    h = o * np.tanh(c)
    if not (np.all(np.isfinite(h)) and np.all(np.isfinite(c))):
        raise NumericalError("non-finite LSTM cell output")
    return h, c


def forward(net: LstmNetwork, sequence: np.ndarray) -> tuple[np.ndarray, ForwardCache]:
    """Run one sequence of step inputs; returns (flat prediction, cache)."""
    sequence = np.asarray(sequence, dtype=np.float64)
    if sequence.ndim != 2 or sequence.shape[0] == 0:
        raise ValueError("sequence must be a non-empty (steps, input) array")
    preds, cache = forward_batch(net, sequence[None, :, :])
    return preds[0], cache


def forward_batch(net: LstmNetwork, X: np.ndarray) -> tuple[np.ndarray, ForwardCache]:
    """Batched forward pass over (batch, steps, input) sequences."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 3 or X.shape[0] == 0 or X.shape[1] == 0:
        raise ValueError("expected a non-empty (batch, steps, input) array")
    if X.shape[2] != net.input_size:
        raise ValueError(f"step input size {X.shape[2]} != network input {net.input_size}")
    B, T, _ = X.shape
    L, H = len(net.layers), net.hidden_size

    gi = np.empty((T, L, B, H))
    gf = np.empty((T, L, B, H))
    gg = np.empty((T, L, B, H))
    go = np.empty((T, L, B, H))
    hs = np.empty((T, L, B, H))
    cs = np.empty((T, L, B, H))

    h_prev = np.zeros((L, B, H))
    c_prev = np.zeros((L, B, H))
    for t in range(T):
        inp = X[:, t, :]
        for l, layer in enumerate(net.layers):
            z = inp @ layer.W.T + h_prev[l] @ layer.U.T + layer.b
            i = expit(z[:, :H])
            f = expit(z[:, H:2 * H])
            g = np.tanh(z[:, 2 * H:3 * H])
            o = expit(z[:, 3 * H:])
            c = f * c_prev[l] + i * g
            h = o * np.tanh(c)
            gi[t, l], gf[t, l], gg[t, l], go[t, l] = i, f, g, o
            hs[t, l], cs[t, l] = h, c
            h_prev[l], c_prev[l] = h, c
            inp = h

    pred = hs[T - 1, L - 1] @ net.predictor_weight.T + net.predictor_bias
    if not np.all(np.isfinite(pred)):
        raise NumericalError("non-finite prediction in forward pass")
    cache = ForwardCache(X, gi, gf, gg, go, hs, cs, pred)
    return pred, cache


def mse_loss(pred: np.ndarray, truth: np.ndarray) -> float:
    """Mean squared difference over all components (and batch, if any)."""
    pred = np.asarray(pred, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if pred.shape != truth.shape:
        raise ValueError(f"shape mismatch {pred.shape} vs {truth.shape}")
    return float(np.mean((pred - truth) ** 2))


def backward(net: LstmNetwork, cache: ForwardCache, truth: np.ndarray) -> LstmGradients:
    """Exact gradients of the MSE loss w.r.t. every parameter.

    ``truth`` is (out,) for a single sequence or (batch, out); the loss is the
    mean over batch and components, matching mse_loss on the batch.
    """
    truth = np.asarray(truth, dtype=np.float64)
    if truth.ndim == 1:
        truth = truth[None, :]
    T, L, B, H = cache.hidden.shape
    if truth.shape != cache.prediction.shape:
        raise ValueError(
            f"truth shape {truth.shape} != prediction shape {cache.prediction.shape}"
        )
    if cache.inputs.shape[2] != net.input_size or H != net.hidden_size or L != len(net.layers):
        raise ValueError("cache does not match this network")

    out = net.output_size
    dpred = 2.0 * (cache.prediction - truth) / (B * out)

    d_weight = dpred.T @ cache.hidden[T - 1, L - 1]
    d_bias = dpred.sum(axis=0)
    grads = LstmGradients(
        layers=[
            LstmLayerParams(
                np.zeros_like(layer.W), np.zeros_like(layer.U), np.zeros_like(layer.b)
            )
            for layer in net.layers
        ],
        predictor_weight=d_weight,
        predictor_bias=d_bias,
    )

    dh_time = np.zeros((L, B, H))  # dL/dh_t arriving from step t+1
    dc_time = np.zeros((L, B, H))
    for t in range(T - 1, -1, -1):
        d_from_above = None
        for l in range(L - 1, -1, -1):
            dh = dh_time[l].copy()
            if l == L - 1:
                if t == T - 1:
                    dh += dpred @ net.predictor_weight
            else:
                dh += d_from_above
            i, f = cache.gates_i[t, l], cache.gates_f[t, l]
            g, o = cache.gates_g[t, l], cache.gates_o[t, l]
            tanh_c = np.tanh(cache.cell[t, l])
            c_prev = cache.cell[t - 1, l] if t > 0 else np.zeros((B, H))
            h_prev = cache.hidden[t - 1, l] if t > 0 else np.zeros((B, H))
            inp = cache.inputs[:, t, :] if l == 0 else cache.hidden[t, l - 1]

            dc = dh * o * (1.0 - tanh_c ** 2) + dc_time[l]
            dz = np.concatenate(
                [
                    dc * g * i * (1.0 - i),
                    dc * c_prev * f * (1.0 - f),
                    dc * i * (1.0 - g ** 2),
                    dh * tanh_c * o * (1.0 - o),
                ],
                axis=1,
            )
            layer = net.layers[l]
            grads.layers[l].W += dz.T @ inp
            grads.layers[l].U += dz.T @ h_prev
            grads.layers[l].b += dz.sum(axis=0)
            dh_time[l] = dz @ layer.U
            dc_time[l] = dc * f
            d_from_above = dz @ layer.W
    return grads


def init_network(
    hidden_size: int,
    layer_count: int,
    input_size: int,
    output_size: int,
    seed: int,
) -> LstmNetwork:
    """Uniform [-k, k] weights with k = 1/sqrt(hidden); forget biases start at 1."""
    if min(hidden_size, layer_count, input_size, output_size) < 1:
        raise ValueError("all network dimensions must be >= 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    k = 1.0 / np.sqrt(hidden_size)
    layers = []
    for l in range(layer_count):
        in_dim = input_size if l == 0 else hidden_size
        W = rng.uniform(-k, k, size=(4 * hidden_size, in_dim))
        U = rng.uniform(-k, k, size=(4 * hidden_size, hidden_size))
        b = np.zeros(4 * hidden_size)
        b[hidden_size:2 * hidden_size] = 1.0
        layers.append(LstmLayerParams(W, U, b))
    pw = rng.uniform(-k, k, size=(output_size, hidden_size))
    pb = np.zeros(output_size)
    return LstmNetwork(layers=layers, predictor_weight=pw, predictor_bias=pb)


def reference_forward(
    net: LstmNetwork,
    sequence: np.ndarray,
    dtype=np.float64,
) -> np.ndarray:
    """Plain per-step loop forward, independent of the batched path.

    Serves as an oracle for forward_batch and, evaluated in extended
    precision, as the function differentiated by gradient_check.
    """
    sequence = np.asarray(sequence).astype(dtype)
    H, L = net.hidden_size, len(net.layers)
    h = [np.zeros(H, dtype) for _ in range(L)]
    c = [np.zeros(H, dtype) for _ in range(L)]
    one = dtype(1.0)
    for t in range(sequence.shape[0]):
        inp = sequence[t]
        for l, layer in enumerate(net.layers):
            z = (
                layer.W.astype(dtype) @ inp
                + layer.U.astype(dtype) @ h[l]
                + layer.b.astype(dtype)
            )
            i = one / (one + np.exp(-z[:H]))
            f = one / (one + np.exp(-z[H:2 * H]))
            g = np.tanh(z[2 * H:3 * H])
            o = one / (one + np.exp(-z[3 * H:]))
            c[l] = f * c[l] + i * g
            h[l] = o * np.tanh(c[l])
            inp = h[l]
    return net.predictor_weight.astype(dtype) @ h[-1] + net.predictor_bias.astype(dtype)


def gradient_check(
    net: LstmNetwork,
    sequence: np.ndarray,
    truth: np.ndarray,
    epsilon: float = 1e-5,
) -> float:
    """Max relative error of analytic gradients vs central finite differences.

    The difference quotient is evaluated through the extended-precision
    reference forward so the oracle is not drowned by float64 rounding on
    components whose true gradient is near zero. Tractable only for tiny
    networks; perturbs every parameter component.
    """
    sequence = np.asarray(sequence, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    pred, cache = forward(net, sequence)
    grads = backward(net, cache, truth)

    truth_hi = truth.astype(np.longdouble)

    def loss() -> np.longdouble:
        p = reference_forward(net, sequence, dtype=np.longdouble)
        return np.mean((p - truth_hi) ** 2)

    worst = 0.0
    two_eps = np.longdouble(2.0 * epsilon)
    analytic_arrays = grads.param_arrays()
    for (name, param), analytic in zip(net.param_arrays(), analytic_arrays):
        flat = param.reshape(-1)
        aflat = analytic.reshape(-1)
        for idx in range(flat.size):
            orig = flat[idx]
            flat[idx] = orig + epsilon
            up = loss()
            flat[idx] = orig - epsilon
            down = loss()
            flat[idx] = orig
            numeric = float((up - down) / two_eps)
            denom = max(abs(aflat[idx]) + abs(numeric), 1e-12)
            worst = max(worst, abs(aflat[idx] - numeric) / denom)
    return worst
