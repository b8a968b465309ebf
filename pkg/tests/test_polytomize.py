import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adaptest.errors import KTooLargeForData
from adaptest.polytomize import (
    DEFAULT_K,
    ThresholdTable,
    apply_thresholds,
    fit_thresholds,
    polytomize_scores,
    unobserved_levels,
)


def uniform_table(K=4):
    return fit_thresholds({1: np.arange(1.0, 101.0)}, K=K)


class TestFitThresholds:
    def test_percentiles_of_1_to_100(self):
        # linear-interpolation percentiles of 1..100 at 25/50/75/100
        table = uniform_table()
        assert np.allclose(table.thresholds[1], [25.75, 50.5, 75.25, 100.0])

    def test_top_threshold_is_split_maximum(self):
        rng = np.random.default_rng(0)
        values = rng.normal(size=57)
        table = fit_thresholds({3: values}, K=8)
        assert table.thresholds[3][-1] == pytest.approx(values.max())

    def test_default_k(self):
        assert DEFAULT_K == 8

    def test_k_too_large(self):
        with pytest.raises(KTooLargeForData):
            fit_thresholds({1: np.arange(5.0)}, K=6)

    def test_k_floor(self):
        with pytest.raises(ValueError):
            fit_thresholds({1: np.arange(10.0)}, K=1)

    def test_sorted_invariant_enforced(self):
        with pytest.raises(ValueError):
            ThresholdTable({1: np.array([2.0, 1.0])}, K=2)


class TestApplyThresholds:
    def test_interior_value(self):
        assert apply_thresholds(uniform_table(), 60.0, 1) == 3

    def test_below_every_cut(self):
        assert apply_thresholds(uniform_table(), -100.0, 1) == 1

    def test_above_split_maximum_clamps(self):
        assert apply_thresholds(uniform_table(), 1e9, 1) == 4

    def test_at_top_cut_is_k(self):
        assert apply_thresholds(uniform_table(), 100.0, 1) == 4

    def test_degenerate_all_equal_maps_to_one(self):
        table = fit_thresholds({1: np.full(20, 3.5)}, K=4)
        assert np.allclose(table.thresholds[1], 3.5)
        for value in (-1.0, 3.5, 99.0):
            got = apply_thresholds(table, value, 1)
            assert got == (1 if value <= 3.5 else 4)
        assert apply_thresholds(table, 3.5, 1) == 1

    def test_occupancy_near_uniform(self):
        rng = np.random.default_rng(1)
        values = rng.normal(size=400)
        table = fit_thresholds({1: values}, K=8)
        levels = np.array([apply_thresholds(table, v, 1) for v in values])
        n = len(values)
        for k in range(1, 9):
            assert abs(np.mean(levels == k) - 1 / 8) <= 2 / n + 1e-12

    @given(
        st.lists(st.floats(-50, 50), min_size=8, max_size=60),
        st.floats(-60, 60),
        st.floats(-60, 60),
    )
    @settings(max_examples=60, deadline=None)
    def test_monotone_in_score(self, values, a, b):
        table = fit_thresholds({1: np.array(values)}, K=4)
        lo, hi = sorted((a, b))
        assert apply_thresholds(table, lo, 1) <= apply_thresholds(table, hi, 1)

    @given(st.lists(st.floats(-50, 50), min_size=8, max_size=60), st.floats(-60, 60))
    @settings(max_examples=60, deadline=None)
    def test_level_always_in_range(self, values, score):
        table = fit_thresholds({1: np.array(values)}, K=4)
        assert 1 <= apply_thresholds(table, score, 1) <= 4

    def test_polytomize_scores_maps_every_item(self):
        table = fit_thresholds(
            {1: np.arange(1.0, 101.0), 2: np.arange(0.0, 1.0, 0.01)}, K=4
        )
        got = polytomize_scores(table, {1: 60.0, 2: 0.2})
        assert got == {1: 3, 2: 1}


class TestUnobservedLevels:
    def test_reports_gaps(self):
        levels = {1: np.array([1, 1, 2, 4]), 2: np.array([1, 2, 3, 4])}
        assert unobserved_levels(levels, K=4) == {1: [3]}

    def test_empty_when_all_present(self):
        assert unobserved_levels({1: np.array([2, 1, 3])}, K=3) == {}
