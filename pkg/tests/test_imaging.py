import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from girnn import (
    ImageTensor,
    MeasurementSequence,
    SpecklePattern,
    bucket_signal,
    generate_speckles,
    measure_sequence,
    sampling_count,
)


class TestImageTensor:
    def test_shape_and_flatten_roundtrip(self):
        img = ImageTensor(np.linspace(0, 1, 12).reshape(3, 4))
        assert (img.height, img.width, img.pixel_count) == (3, 4, 12)
        back = ImageTensor.from_flat(img.flatten(), 3, 4)
        np.testing.assert_array_equal(back.data, img.data)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            ImageTensor(np.array([[0.5, 1.2]]))
        with pytest.raises(ValueError):
            ImageTensor(np.array([[-0.1, 0.2]]))

    def test_rejects_bad_shapes(self):
        with pytest.raises(ValueError):
            ImageTensor(np.zeros(4))
        with pytest.raises(ValueError):
            ImageTensor(np.zeros((0, 3)))


class TestGenerateSpeckles:
    def test_shape_and_range_binary(self):
        seq = generate_speckles(7, 3, 28, 28, "binary")
        assert len(seq) == 3
        assert seq.stack.shape == (3, 28, 28)
        assert set(np.unique(seq.stack)) <= {0.0, 1.0}

    def test_deterministic(self):
        a = generate_speckles(7, 5, 8, 8, "binary")
        b = generate_speckles(7, 5, 8, 8, "binary")
        np.testing.assert_array_equal(a.stack, b.stack)
        c = generate_speckles(8, 5, 8, 8, "binary")
        assert not np.array_equal(a.stack, c.stack)

    def test_binary_mean_band(self):
        # binomial tail: P(mean outside [0.4, 0.6]) per pattern is < 1e-8 at
        # n = 784, so all 10000 patterns must land inside
        seq = generate_speckles(7, 10000, 28, 28, "binary")
        means = seq.stack.mean(axis=(1, 2))
        assert means.min() >= 0.4 and means.max() <= 0.6

    def test_uniform_range(self):
        seq = generate_speckles(3, 4, 6, 6, "uniform")
        assert seq.stack.min() >= 0.0 and seq.stack.max() < 1.0

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            generate_speckles(1, 0, 4, 4)
        with pytest.raises(ValueError):
            generate_speckles(1, 2, 0, 4)
        with pytest.raises(ValueError):
            generate_speckles(1, 2, 4, 4, "gaussian")

    def test_prefix_keeps_tags(self):
        seq = generate_speckles(9, 10, 4, 4)
        pre = seq.prefix(3)
        assert pre.seed == 9 and pre.distribution == "binary" and len(pre) == 3
        np.testing.assert_array_equal(pre.stack, seq.stack[:3])


class TestBucketSignal:
    def test_all_ones_speckle(self):
        s = SpecklePattern(np.ones((2, 2)))
        t = ImageTensor(np.array([[0.2, 0.3], [0.1, 0.4]]))
        assert bucket_signal(s, t) == pytest.approx(1.0)

    def test_all_zero_speckle(self):
        s = SpecklePattern(np.zeros((2, 2)))
        t = ImageTensor(np.array([[0.9, 0.3], [0.1, 0.4]]))
        assert bucket_signal(s, t) == 0.0

    def test_diagonal_speckle(self):
        s = SpecklePattern(np.array([[1.0, 0.0], [0.0, 1.0]]))
        t = ImageTensor(np.array([[0.5, 0.9], [0.8, 0.25]]))
        assert bucket_signal(s, t) == pytest.approx(0.75)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            bucket_signal(SpecklePattern(np.ones((2, 3))), ImageTensor(np.ones((3, 2))))

    @given(
        s=arrays(np.float64, (4, 4), elements=st.floats(0, 1)),
        t1=arrays(np.float64, (4, 4), elements=st.floats(0, 1)),
        t2=arrays(np.float64, (4, 4), elements=st.floats(0, 1)),
        a=st.floats(0, 1),
        b=st.floats(0, 1),
    )
    @settings(max_examples=50, deadline=None)
    def test_linearity(self, s, t1, t2, a, b):
        # scale the combination back into [0, 1] so it stays a valid image
        combo = np.clip((a * t1 + b * t2) / 2.0, 0.0, 1.0)
        sp = SpecklePattern(s)
        lhs = bucket_signal(sp, ImageTensor(combo))
        rhs = float(np.sum(s * combo))
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)

    @given(
        s=arrays(np.float64, (3, 3), elements=st.floats(0, 1)),
        t=arrays(np.float64, (3, 3), elements=st.floats(0, 0.9)),
        delta=st.floats(0.0, 0.1),
    )
    @settings(max_examples=50, deadline=None)
    def test_monotone_in_target(self, s, t, delta):
        sp = SpecklePattern(s)
        bumped = t.copy()
        bumped[1, 1] += delta
        assert bucket_signal(sp, ImageTensor(bumped)) >= bucket_signal(sp, ImageTensor(t))


class TestMeasureSequence:
    def test_index_alignment(self, rng):
        speckles = generate_speckles(5, 3, 4, 4)
        target = ImageTensor(rng.random((4, 4)))
        m = measure_sequence(speckles, target)
        assert len(m) == 3
        for i in range(3):
            assert m.buckets[i] == pytest.approx(bucket_signal(speckles[i], target))

    def test_zero_target(self):
        speckles = generate_speckles(5, 4, 4, 4)
        m = measure_sequence(speckles, ImageTensor(np.zeros((4, 4))))
        np.testing.assert_array_equal(m.buckets, np.zeros(4))

    def test_linearity_in_target(self, rng):
        speckles = generate_speckles(6, 5, 4, 4)
        t1, t2 = rng.random((4, 4)), rng.random((4, 4))
        a, b = 0.3, 0.45
        combo = measure_sequence(speckles, ImageTensor(a * t1 + b * t2)).buckets
        parts = a * measure_sequence(speckles, ImageTensor(t1)).buckets \
            + b * measure_sequence(speckles, ImageTensor(t2)).buckets
        np.testing.assert_allclose(combo, parts, rtol=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            measure_sequence(generate_speckles(1, 2, 4, 4), ImageTensor(np.zeros((5, 5))))

    def test_bucket_count_invariant(self):
        speckles = generate_speckles(1, 3, 2, 2)
        with pytest.raises(ValueError):
            MeasurementSequence(speckles, np.zeros(2))


class TestSamplingCount:
    def test_paper_rates(self):
        assert sampling_count(0.0038, 784) == 3
        assert sampling_count(0.25, 784) == 196
        assert sampling_count(0.0625, 784) == 49

    def test_floor_one(self):
        assert sampling_count(1e-9, 784) == 1

    def test_full_rate(self):
        assert sampling_count(1.0, 784) == 784

    def test_invalid_rate(self):
        for rate in (0.0, -0.1, 1.5):
            with pytest.raises(ValueError):
                sampling_count(rate, 784)

    @given(st.floats(1e-6, 1.0), st.floats(1e-6, 1.0))
    @settings(max_examples=100, deadline=None)
    def test_nondecreasing_in_rate(self, r1, r2):
        lo, hi = sorted((r1, r2))
        assert sampling_count(lo, 784) <= sampling_count(hi, 784)
