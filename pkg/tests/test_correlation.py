import numpy as np
import pytest

from girnn import (
    ImageTensor,
    MeasurementSequence,
    SpeckleSequence,
    correlate,
    generate_speckles,
    measure_sequence,
    normalize_minmax,
)


def brute_force_correlate(measurements: MeasurementSequence) -> np.ndarray:
    """Independent oracle: explicit triple loop over (i, x, y)."""
    stack = measurements.speckles.stack
    n, h, w = stack.shape
    out = np.zeros((h, w))
    for i in range(n):
        for x in range(h):
            for y in range(w):
                out[x, y] += stack[i, x, y] * measurements.buckets[i]
    return out


def _manual_measurements(patterns, buckets):
    stack = np.array(patterns, dtype=float)
    seq = SpeckleSequence(stack, seed=0, distribution="uniform")
    return MeasurementSequence(seq, np.array(buckets, dtype=float))


class TestCorrelate:
    def test_two_pattern_example(self):
        m = _manual_measurements([[[1.0, 0.0]], [[0.0, 1.0]]], [2.0, 3.0])
        np.testing.assert_array_equal(correlate(m), [[2.0, 3.0]])

    def test_single_measurement_scales_pattern(self, rng):
        p = rng.random((3, 3))
        m = _manual_measurements([p], [2.5])
        np.testing.assert_array_equal(correlate(m), 2.5 * p)

    def test_zero_buckets(self):
        speckles = generate_speckles(1, 4, 3, 3)
        m = MeasurementSequence(speckles, np.zeros(4))
        np.testing.assert_array_equal(correlate(m), np.zeros((3, 3)))

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            SpeckleSequence(np.empty((0, 2, 2)), seed=0, distribution="binary")

    def test_matches_brute_force_oracle(self, rng):
        for trial in range(20):
            h, w = rng.integers(1, 9, size=2)
            n = int(rng.integers(1, 51))
            speckles = generate_speckles(int(rng.integers(1e6)), n, int(h), int(w))
            target = ImageTensor(rng.random((int(h), int(w))))
            m = measure_sequence(speckles, target)
            np.testing.assert_array_equal(correlate(m), brute_force_correlate(m))

    def test_additive_in_measurements(self, rng):
        speckles = generate_speckles(3, 10, 4, 4)
        target = ImageTensor(rng.random((4, 4)))
        m = measure_sequence(speckles, target)
        first = MeasurementSequence(speckles.prefix(4), m.buckets[:4])
        rest = MeasurementSequence(
            SpeckleSequence(speckles.stack[4:], seed=3, distribution="binary"),
            m.buckets[4:],
        )
        # split sums regroup the float additions, so equality is up to
        # associativity rounding, not bitwise
        np.testing.assert_allclose(
            correlate(m), correlate(first) + correlate(rest), rtol=1e-12
        )

    def test_bucket_scaling(self, rng):
        speckles = generate_speckles(4, 6, 4, 4)
        target = ImageTensor(rng.random((4, 4)))
        m = measure_sequence(speckles, target)
        # power-of-two scale factor keeps every float operation exact
        scaled = MeasurementSequence(speckles, 2.0 * m.buckets)
        np.testing.assert_array_equal(correlate(scaled), 2.0 * correlate(m))
        np.testing.assert_array_equal(
            normalize_minmax(correlate(scaled)).data,
            normalize_minmax(correlate(m)).data,
        )


class TestNormalizeMinmax:
    def test_two_values(self):
        out = normalize_minmax(np.array([[2.0, 3.0]]))
        np.testing.assert_array_equal(out.data, [[0.0, 1.0]])

    def test_constant_grid(self):
        out = normalize_minmax(np.full((1, 3), 5.0))
        np.testing.assert_array_equal(out.data, np.zeros((1, 3)))

    def test_three_values(self):
        out = normalize_minmax(np.array([[0.0, 2.0, 4.0]]))
        np.testing.assert_array_equal(out.data, [[0.0, 0.5, 1.0]])

    def test_output_in_unit_range(self, rng):
        out = normalize_minmax(rng.standard_normal((6, 6)))
        assert out.data.min() == 0.0 and out.data.max() == 1.0
