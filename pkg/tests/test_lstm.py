import numpy as np
import pytest

from girnn import (
    LstmLayerParams,
    LstmNetwork,
    SpecklePattern,
    encode_sequence,
    encode_step,
    forward,
    forward_batch,
    generate_speckles,
    gradient_check,
    init_network,
    lstm_cell_forward,
    measure_sequence,
    mse_loss,
    reference_forward,
    ImageTensor,
)


def zero_network(hidden, layers, input_size, output_size):
    net = init_network(hidden, layers, input_size, output_size, seed=0)
    for _, arr in net.param_arrays():
        arr[...] = 0.0
    return net


class TestEncodeStep:
    def test_bucket_scaling(self):
        speckle = SpecklePattern(np.ones((28, 28)))
        vec = encode_step(speckle, 392.0, 784)
        assert vec.shape == (785,)
        assert vec[-1] == pytest.approx(0.5)

    def test_zero_everything(self):
        vec = encode_step(SpecklePattern(np.zeros((28, 28))), 0.0, 784)
        np.testing.assert_array_equal(vec, np.zeros(785))

    def test_binary_entries_preserved(self):
        seq = generate_speckles(3, 1, 28, 28)
        vec = encode_step(seq[0], 100.0, 784)
        np.testing.assert_array_equal(vec[:784], seq.stack[0].reshape(-1))

    def test_pixel_count_mismatch(self):
        with pytest.raises(ValueError):
            encode_step(SpecklePattern(np.zeros((4, 4))), 1.0, 784)

    def test_encode_sequence_matches_steps(self, rng):
        speckles = generate_speckles(5, 4, 6, 6)
        target = ImageTensor(rng.random((6, 6)))
        m = measure_sequence(speckles, target)
        X = encode_sequence(m)
        assert X.shape == (4, 37)
        for t in range(4):
            np.testing.assert_array_equal(
                X[t], encode_step(speckles[t], m.buckets[t], 36)
            )


class TestCellForward:
    def test_zero_params_give_zero_state(self):
        params = LstmLayerParams(np.zeros((16, 3)), np.zeros((16, 4)), np.zeros(16))
        h, c = lstm_cell_forward(params, np.ones(3), np.zeros(4), np.zeros(4))
        np.testing.assert_array_equal(h, np.zeros(4))
        np.testing.assert_array_equal(c, np.zeros(4))

    def test_saturated_forget_gate_preserves_cell(self):
        # forget bias 50 drives f to 1; all other parameters zero keep i*g = 0
        b = np.zeros(16)
        b[4:8] = 50.0
        params = LstmLayerParams(np.zeros((16, 3)), np.zeros((16, 4)), b)
        c_prev = np.array([0.3, -0.7, 0.1, 0.9])
        _, c = lstm_cell_forward(params, np.ones(3), np.zeros(4), c_prev)
        np.testing.assert_allclose(c, c_prev, atol=1e-10)

    def test_matches_scalar_loop_oracle(self, rng):
        H, D = 4, 3
        params = LstmLayerParams(
            rng.standard_normal((4 * H, D)),
            rng.standard_normal((4 * H, H)),
            rng.standard_normal(4 * H),
        )
        x, h_prev, c_prev = rng.random(D), rng.random(H), rng.random(H)
        h, c = lstm_cell_forward(params, x, h_prev, c_prev)

        def sigmoid(v):
            return 1.0 / (1.0 + np.exp(-v))

        for j in range(H):
            zi = params.W[j] @ x + params.U[j] @ h_prev + params.b[j]
            zf = params.W[H + j] @ x + params.U[H + j] @ h_prev + params.b[H + j]
            zg = params.W[2 * H + j] @ x + params.U[2 * H + j] @ h_prev + params.b[2 * H + j]
            zo = params.W[3 * H + j] @ x + params.U[3 * H + j] @ h_prev + params.b[3 * H + j]
            cj = sigmoid(zf) * c_prev[j] + sigmoid(zi) * np.tanh(zg)
            hj = sigmoid(zo) * np.tanh(cj)
            assert abs(c[j] - cj) < 1e-12
            assert abs(h[j] - hj) < 1e-12

    def test_dimension_mismatch(self):
        params = LstmLayerParams(np.zeros((16, 3)), np.zeros((16, 4)), np.zeros(16))
        with pytest.raises(ValueError):
            lstm_cell_forward(params, np.ones(5), np.zeros(4), np.zeros(4))


class TestForward:
    def test_state_accumulates_across_steps(self, rng):
        net = init_network(6, 1, 5, 4, seed=2)
        step = rng.random(5)
        one, _ = forward(net, step[None, :])
        two, _ = forward(net, np.stack([step, step]))
        assert not np.allclose(one, two)

    def test_zero_network_outputs_bias(self, rng):
        net = zero_network(6, 2, 5, 4)
        net.predictor_bias[:] = [0.1, -0.2, 0.3, 0.0]
        pred, _ = forward(net, rng.random((3, 5)))
        np.testing.assert_array_equal(pred, net.predictor_bias)

    def test_matches_hand_unrolled_oracle(self, rng):
        net = init_network(3, 1, 4, 2, seed=5)
        seq = rng.random((2, 4))
        pred, _ = forward(net, seq)
        h, c = lstm_cell_forward(net.layers[0], seq[0], np.zeros(3), np.zeros(3))
        h, c = lstm_cell_forward(net.layers[0], seq[1], h, c)
        expected = net.predictor_weight @ h + net.predictor_bias
        np.testing.assert_allclose(pred, expected, atol=1e-12)

    def test_matches_reference_loop(self, rng):
        net = init_network(5, 2, 6, 4, seed=9)
        seq = rng.random((4, 6))
        pred, _ = forward(net, seq)
        np.testing.assert_allclose(pred, reference_forward(net, seq), atol=1e-12)

    def test_forward_is_pure(self, rng):
        net = init_network(4, 2, 5, 3, seed=1)
        before = [arr.copy() for _, arr in net.param_arrays()]
        seq = rng.random((3, 5))
        a, _ = forward(net, seq)
        b, _ = forward(net, seq)
        np.testing.assert_array_equal(a, b)
        for (_, arr), prev in zip(net.param_arrays(), before):
            np.testing.assert_array_equal(arr, prev)

    def test_hidden_state_bound(self, rng):
        net = init_network(8, 2, 6, 4, seed=3)
        # exaggerate the weights; |h| < 1 holds structurally regardless
        for _, arr in net.param_arrays():
            arr *= 40.0
        _, cache = forward(net, rng.random((5, 6)))
        assert np.abs(cache.hidden).max() < 1.0

    def test_empty_sequence_rejected(self):
        net = init_network(4, 1, 5, 3, seed=0)
        with pytest.raises(ValueError):
            forward(net, np.empty((0, 5)))

    def test_batch_consistent_with_single(self, rng):
        net = init_network(5, 2, 6, 4, seed=11)
        X = rng.random((3, 4, 6))
        batch_pred, _ = forward_batch(net, X)
        for i in range(3):
            single, _ = forward(net, X[i])
            np.testing.assert_allclose(single, batch_pred[i], atol=1e-12)


class TestMseLoss:
    def test_identical(self):
        v = np.linspace(0, 1, 10)
        assert mse_loss(v, v) == 0.0

    def test_constant_offset(self):
        v = np.zeros(784)
        assert mse_loss(v + 0.1, v) == pytest.approx(0.01)

    def test_swapped_pair(self):
        assert mse_loss(np.array([0.0, 1.0]), np.array([1.0, 0.0])) == pytest.approx(1.0)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            mse_loss(np.zeros(3), np.zeros(4))


class TestNetworkInit:
    def test_deterministic_in_seed(self):
        a = init_network(8, 2, 17, 16, seed=21)
        b = init_network(8, 2, 17, 16, seed=21)
        for (_, x), (_, y) in zip(a.param_arrays(), b.param_arrays()):
            np.testing.assert_array_equal(x, y)

    def test_reference_scale_shapes(self):
        net = init_network(1024, 5, 785, 784, seed=0)
        assert net.layers[0].W.shape == (4096, 785)
        for layer in net.layers[1:]:
            assert layer.W.shape == (4096, 1024)
        assert net.predictor_weight.shape == (784, 1024)

    def test_weight_range(self):
        net = init_network(16, 2, 10, 8, seed=4)
        k = 1.0 / np.sqrt(16)
        for name, arr in net.param_arrays():
            if name.endswith(".b"):
                continue
            assert np.abs(arr).max() <= k

    def test_forget_bias_one(self):
        net = init_network(8, 3, 10, 8, seed=4)
        for layer in net.layers:
            np.testing.assert_array_equal(layer.b[8:16], np.ones(8))
            np.testing.assert_array_equal(layer.b[:8], np.zeros(8))
            np.testing.assert_array_equal(layer.b[16:], np.zeros(16))

    def test_invalid_dimensions(self):
        with pytest.raises(ValueError):
            init_network(0, 1, 5, 4, seed=0)
        with pytest.raises(ValueError):
            init_network(4, 1, 5, 0, seed=0)


class TestGradients:
    def test_zero_residual_zero_predictor_grads(self):
        from girnn import backward

        net = zero_network(4, 1, 5, 3)
        truth = np.array([0.2, -0.4, 0.9])
        net.predictor_bias[:] = truth
        seq = np.random.default_rng(0).random((2, 5))
        _, cache = forward(net, seq)
        grads = backward(net, cache, truth)
        np.testing.assert_array_equal(grads.predictor_weight, np.zeros((3, 4)))
        np.testing.assert_array_equal(grads.predictor_bias, np.zeros(3))

    def test_residual_doubling_doubles_bias_grad(self, rng):
        from girnn import backward

        net = init_network(4, 1, 5, 3, seed=8)
        seq = rng.random((3, 5))
        pred, cache = forward(net, seq)
        shift = rng.random(3)
        g1 = backward(net, cache, pred - shift)
        g2 = backward(net, cache, pred - 2.0 * shift)
        np.testing.assert_allclose(g2.predictor_bias, 2.0 * g1.predictor_bias, rtol=1e-12)

    def test_gradient_check_tiny(self, rng):
        net = init_network(4, 2, 6, 5, seed=3)
        err = gradient_check(net, rng.random((3, 6)), rng.random(5))
        assert err < 1e-4

    def test_gradient_check_epsilon_stability(self, rng):
        net = init_network(3, 1, 4, 3, seed=6)
        seq, truth = rng.random((2, 4)), rng.random(3)
        e1 = gradient_check(net, seq, truth, epsilon=1e-5)
        e2 = gradient_check(net, seq, truth, epsilon=5e-6)
        assert e1 < 1e-4 and e2 < 1e-4
        assert e2 < 10 * max(e1, 1e-12) or e1 < 10 * max(e2, 1e-12)

    def test_gradient_check_zero_network(self, rng):
        # with all weights zero only the linear predictor is active
        net = zero_network(3, 1, 4, 3)
        err = gradient_check(net, rng.random((2, 4)), rng.random(3))
        assert err < 1e-8

    def test_permuting_steps_changes_output(self, rng):
        net = init_network(6, 1, 5, 4, seed=13)
        seq = rng.random((4, 5))
        base, _ = forward(net, seq)
        permuted, _ = forward(net, seq[[2, 0, 3, 1]])
        assert not np.allclose(base, permuted)


class TestNetworkValidation:
    def test_layer_shape_consistency(self):
        layers = [LstmLayerParams(np.zeros((16, 5)), np.zeros((16, 4)), np.zeros(16))]
        with pytest.raises(ValueError):
            LstmNetwork(layers, np.zeros((3, 5)), np.zeros(3))

    def test_needs_layers(self):
        with pytest.raises(ValueError):
            LstmNetwork([], np.zeros((3, 4)), np.zeros(3))

    def test_rejects_nonfinite_parameters(self):
        W = np.zeros((16, 5))
        W[0, 0] = np.nan
        with pytest.raises(ValueError):
            LstmLayerParams(W, np.zeros((16, 4)), np.zeros(16))
