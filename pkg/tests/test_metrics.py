import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridirl import evaluate_interpolations, mhd
from gridirl.errors import EmptyInput, LengthMismatch

finite_pts = st.lists(
    st.tuples(st.floats(-50, 50), st.floats(-50, 50)), min_size=1, max_size=12
)


class TestMhd:
    def test_identical_sequences_zero(self):
        a = [(0.0, 0.0), (1.0, 2.0), (3.0, 1.0)]
        assert mhd(a, a) == 0.0

    def test_parallel_segments(self):
        assert mhd([(0, 0), (1, 0)], [(0, 1), (1, 1)]) == 1.0

    def test_single_points_euclidean(self):
        assert mhd([(0, 0)], [(3, 4)]) == 5.0

    def test_empty_raises(self):
        with pytest.raises(EmptyInput):
            mhd([], [(0, 0)])

    @given(finite_pts, finite_pts)
    @settings(max_examples=100, deadline=None)
    def test_symmetric_nonnegative(self, a, b):
        d1 = mhd(a, b)
        d2 = mhd(b, a)
        assert d1 == d2
        assert d1 >= 0.0

    @given(finite_pts)
    @settings(max_examples=50, deadline=None)
    def test_identity(self, a):
        assert mhd(a, a) == 0.0

    @given(finite_pts, finite_pts, st.floats(-100, 100), st.floats(-100, 100))
    @settings(max_examples=60, deadline=None)
    def test_translation_invariant(self, a, b, tx, ty):
        shift = np.array([tx, ty])
        d0 = mhd(a, b)
        d1 = mhd(np.asarray(a) + shift, np.asarray(b) + shift)
        assert d1 == pytest.approx(d0, rel=1e-9, abs=1e-9)

    @given(finite_pts, finite_pts)
    @settings(max_examples=60, deadline=None)
    def test_bounded_by_max_pairwise(self, a, b):
        pa = np.asarray(a, dtype=float)
        pb = np.asarray(b, dtype=float)
        pair_max = np.sqrt(
            ((pa[:, None, :] - pb[None, :, :]) ** 2).sum(-1)
        ).max()
        assert mhd(a, b) <= pair_max + 1e-12


class TestEvaluate:
    def test_perfect_predictions(self):
        gt = [[(0, 0), (1, 1)], [(2, 2), (3, 3)]]
        mean, std, per = evaluate_interpolations(gt, gt)
        assert (mean, std) == (0.0, 0.0)
        assert per == [0.0, 0.0]

    def test_sample_std(self):
        gt = [[(0.0, 0.0)], [(0.0, 0.0)]]
        pred = [[(1.0, 0.0)], [(3.0, 0.0)]]
        mean, std, per = evaluate_interpolations(gt, pred)
        assert mean == pytest.approx(2.0)
        assert std == pytest.approx(np.sqrt(2.0))

    def test_matches_independent_recomputation(self, rng):
        gt = [rng.uniform(-5, 5, (4, 2)) for _ in range(6)]
        pred = [rng.uniform(-5, 5, (3, 2)) for _ in range(6)]
        mean, std, per = evaluate_interpolations(gt, pred)

        def naive_mhd(a, b):
            fwd = np.mean([min(np.hypot(*(p - q)) for q in b) for p in a])
            bwd = np.mean([min(np.hypot(*(p - q)) for q in a) for p in b])
            return max(fwd, bwd)

        want = [naive_mhd(g, p) for g, p in zip(gt, pred)]
        np.testing.assert_allclose(per, want, rtol=1e-12)
        assert mean == pytest.approx(np.mean(want))
        assert std == pytest.approx(np.std(want, ddof=1))

    def test_single_pair_std_zero(self):
        mean, std, _ = evaluate_interpolations([[(0, 0)]], [[(1, 0)]])
        assert (mean, std) == (1.0, 0.0)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            evaluate_interpolations([[(0, 0)]], [])
