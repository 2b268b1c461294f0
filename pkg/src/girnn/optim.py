"""Adam optimizer over flat lists of parameter arrays."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .lstm import LstmGradients, LstmLayerParams, LstmNetwork


@dataclass(frozen=True)
class AdamState:
    """First/second moment accumulators aligned with the parameter list."""

    m: tuple[np.ndarray, ...]
    v: tuple[np.ndarray, ...]
    step: int = 0
    learning_rate: float = 0.0001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.0

    @staticmethod
    def for_params(
        params: list[np.ndarray],
        learning_rate: float = 0.0001,
        weight_decay: float = 0.0,
    ) -> "AdamState":
        return AdamState(
            m=tuple(np.zeros_like(p) for p in params),
            v=tuple(np.zeros_like(p) for p in params),
            learning_rate=learning_rate,
            weight_decay=weight_decay,
        )


def adam_step(
    params: list[np.ndarray],
    grads: list[np.ndarray],
    state: AdamState,
) -> tuple[list[np.ndarray], AdamState]:
    """One bias-corrected Adam update; pure, returns fresh arrays and state."""
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ValueError("params, grads, and state must have matching lengths")
    for p, g in zip(params, grads):
        if p.shape != g.shape:
            raise ValueError(f"gradient shape {g.shape} != parameter shape {p.shape}")
    t = state.step + 1
    b1, b2 = state.beta1, state.beta2
    new_params, new_m, new_v = [], [], []
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if state.weight_decay:
            g = g + state.weight_decay * p
        m_t = b1 * m + (1.0 - b1) * g
        v_t = b2 * v + (1.0 - b2) * g * g
        m_hat = m_t / (1.0 - b1 ** t)
        v_hat = v_t / (1.0 - b2 ** t)
        new_params.append(p - state.learning_rate * m_hat / (np.sqrt(v_hat) + state.eps))
        new_m.append(m_t)
        new_v.append(v_t)
    return new_params, replace(state, m=tuple(new_m), v=tuple(new_v), step=t)


def adam_step_network(
    net: LstmNetwork,
    grads: LstmGradients,
    state: AdamState,
) -> tuple[LstmNetwork, AdamState]:
    """Adam update applied to a whole network; returns a new network."""
    params = [arr for _, arr in net.param_arrays()]
    updated, new_state = adam_step(params, grads.param_arrays(), state)
    layers = []
    for i in range(len(net.layers)):
        W, U, b = updated[3 * i: 3 * i + 3]
        layers.append(LstmLayerParams(W, U, b))
    new_net = LstmNetwork(
        layers=layers,
        predictor_weight=updated[-2],
        predictor_bias=updated[-1],
        meta=dict(net.meta),
    )
    return new_net, new_state
