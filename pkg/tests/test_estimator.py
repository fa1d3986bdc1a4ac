import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trajsurv.estimator import (
    greenwood_ci,
    km_fit,
    median_survival,
    summarize,
    survival_at,
)

from helpers import HAND_CURVE_PAIRS, subjects


@pytest.fixture(scope="module")
def hand_curve():
    return km_fit(subjects(HAND_CURVE_PAIRS))


class TestKmFit:
    def test_hand_curve_values_exact(self, hand_curve):
        # (1,E),(2,C),(3,E),(4,E),(5,C): S = 4/5, 4/5*2/3, 4/5*2/3*1/2
        assert hand_curve.times.tolist() == [1.0, 3.0, 4.0]
        assert hand_curve.n_risk.tolist() == [5, 3, 2]
        assert hand_curve.n_event.tolist() == [1, 1, 1]
        expected = [Fraction(4, 5), Fraction(8, 15), Fraction(4, 15)]
        for got, want in zip(hand_curve.survival, expected):
            assert abs(got - float(want)) < 1e-12
        assert median_survival(hand_curve) == 4.0

    def test_hand_curve_censoring_attribution(self, hand_curve):
        # censored at 2 leaves between event times 1 and 3; censored at 5 after the last event
        assert hand_curve.n_censored.tolist() == [1, 0, 1]
        assert hand_curve.n_censored_before_first == 0
        assert hand_curve.n_subjects == 5
        assert hand_curve.n_events_total == 3
        assert hand_curve.n_censored_total == 2

    def test_risk_set_recurrence(self, hand_curve):
        for i in range(len(hand_curve.times) - 1):
            assert hand_curve.n_risk[i + 1] == hand_curve.n_risk[i] - hand_curve.n_event[i] - hand_curve.n_censored[i]

    def test_all_censored_is_flat_one(self):
        curve = km_fit(subjects([(i + 1.0, 0) for i in range(10)]))
        assert curve.times.size == 0
        assert median_survival(curve) == math.inf
        assert survival_at(curve, 100.0) == 1.0

    def test_no_censoring_matches_ecdf_exactly(self):
        rng = np.random.default_rng(1234)
        for _ in range(50):
            n = int(rng.integers(1, 120))
            durations = rng.random(n) * 10
            if rng.random() < 0.3:
                durations = np.round(durations)  # force ties
            curve = km_fit(subjects([(d, 1) for d in durations]))
            n_leq = np.searchsorted(np.sort(durations), curve.times, side="right")
            expected = (n - n_leq) / n
            assert np.array_equal(curve.survival, expected)

    def test_events_at_time_zero_supported(self):
        curve = km_fit(subjects([(0.0, 1), (0.0, 1), (1.0, 0)]))
        assert curve.times.tolist() == [0.0]
        assert curve.n_risk.tolist() == [3]
        assert curve.survival[0] == pytest.approx(1 / 3)

    def test_censoring_at_event_time_stays_in_risk_set(self):
        # events before censorings at equal times
        curve = km_fit(subjects([(1.0, 1), (1.0, 0), (2.0, 1)]))
        assert curve.n_risk.tolist() == [3, 1]
        assert curve.n_censored.tolist() == [1, 0]
        assert curve.survival[0] == pytest.approx(2 / 3)

    def test_single_subject_event(self):
        curve = km_fit(subjects([(2.0, 1)]))
        assert median_survival(curve) == 2.0
        assert curve.survival[0] == 0.0
        assert curve.variance[0] == 0.0

    def test_input_order_is_irrelevant(self):
        a = km_fit(subjects([(3.0, 1), (1.0, 0), (2.0, 1)]))
        b = km_fit(subjects([(1.0, 0), (2.0, 1), (3.0, 1)]))
        assert np.array_equal(a.survival, b.survival)
        assert np.array_equal(a.times, b.times)

    def test_empty_input_rejected(self):
        with pytest.raises(ValueError):
            km_fit([])

    def test_long_float_products_degrade_gracefully(self):
        # alternating events/censorings keep the exact-fraction path from
        # telescoping; the estimator must still produce a sane monotone curve
        rng = np.random.default_rng(7)
        pairs = [(float(d), int(e)) for d, e in zip(rng.random(4000) * 40, rng.integers(0, 2, 4000))]
        curve = km_fit(subjects(pairs))
        assert np.all(np.diff(curve.survival) < 0)
        assert np.all((curve.survival >= 0) & (curve.survival <= 1))


class TestLookups:
    def test_survival_at_steps(self, hand_curve):
        assert survival_at(hand_curve, 0.0) == 1.0
        assert survival_at(hand_curve, 0.999) == 1.0
        assert survival_at(hand_curve, 1.0) == pytest.approx(0.8)
        assert survival_at(hand_curve, 3.5) == pytest.approx(8 / 15)
        assert survival_at(hand_curve, 100.0) == pytest.approx(4 / 15)

    def test_negative_probe_rejected(self, hand_curve):
        with pytest.raises(ValueError):
            survival_at(hand_curve, -0.1)

    def test_median_inf_when_floor_above_half(self):
        pairs = [(1.0, 1), (1.0, 1)] + [(6.0, 0)] * 8
        curve = km_fit(subjects(pairs))
        assert curve.survival[-1] == pytest.approx(0.8)
        assert median_survival(curve) == math.inf

    def test_median_definition_matches_curve_floor(self):
        rng = np.random.default_rng(99)
        for _ in range(200):
            n = int(rng.integers(1, 40))
            pairs = [(float(d), int(e)) for d, e in zip(rng.random(n) * 10, rng.integers(0, 2, n))]
            if not any(e for _, e in pairs):
                continue
            curve = km_fit(subjects(pairs))
            med = median_survival(curve)
            if curve.times.size and curve.survival.min() <= 0.5:
                assert math.isfinite(med)
                assert survival_at(curve, med) <= 0.5
                before = med - 1e-9
                assert survival_at(curve, before) > 0.5 or before < curve.times[0]
            else:
                assert med == math.inf

    def test_summarize_collects_probes(self, hand_curve):
        summary = summarize(hand_curve, probes=(1.0, 3.5, 10.0))
        assert summary.n_total == 5 and summary.n_events == 3 and summary.n_censored == 2
        assert summary.median_survival == 4.0
        assert summary.probe_survival[3.5] == pytest.approx(8 / 15)


class TestGreenwood:
    def test_hand_variance_at_first_event(self, hand_curve):
        assert hand_curve.variance[0] == pytest.approx(0.8**2 * (1 / (5 * 4)), abs=1e-15)
        assert hand_curve.variance[0] == pytest.approx(0.032, abs=1e-12)

    def test_single_event_among_hundred(self):
        curve = km_fit(subjects([(1.0, 1)] + [(2.0, 0)] * 99))
        assert curve.variance[0] == pytest.approx(0.99**2 / (100 * 99), rel=1e-12)
        assert curve.variance[0] == pytest.approx(9.9e-05, rel=1e-3)

    def test_band_properties(self, hand_curve):
        lower, upper = greenwood_ci(hand_curve, 0.95)
        for lo, s, hi in zip(lower, hand_curve.survival, upper):
            assert 0.0 <= lo <= s <= hi <= 1.0
            assert lo < s < hi  # strictly interior for 0 < S < 1

    def test_band_degenerates_at_zero_survival(self):
        curve = km_fit(subjects([(1.0, 1), (2.0, 1)]))
        lower, upper = greenwood_ci(curve)
        assert lower[-1] == upper[-1] == 0.0

    def test_wider_level_widens_band(self, hand_curve):
        lo95, hi95 = greenwood_ci(hand_curve, 0.95)
        lo99, hi99 = greenwood_ci(hand_curve, 0.99)
        assert np.all(lo99 <= lo95) and np.all(hi99 >= hi95)

    def test_invalid_level_rejected(self, hand_curve):
        for level in (0.0, 1.0, -0.5, 1.5):
            with pytest.raises(ValueError):
                greenwood_ci(hand_curve, level)


@given(
    st.lists(
        st.tuples(st.floats(min_value=0.0, max_value=50.0, allow_nan=False), st.booleans()),
        min_size=1,
        max_size=60,
    ),
    st.floats(min_value=0.01, max_value=100.0),
)
@settings(max_examples=80, deadline=None)
def test_scale_equivariance(pairs, c):
    base = km_fit(subjects(pairs))
    scaled = km_fit(subjects([(d * c, e) for d, e in pairs]))
    assert np.array_equal(base.survival, scaled.survival)
    assert np.array_equal(base.n_risk, scaled.n_risk)
    assert scaled.times == pytest.approx([t * c for t in base.times], rel=1e-12)
    base_med, scaled_med = median_survival(base), median_survival(scaled)
    if math.isinf(base_med):
        assert math.isinf(scaled_med)
    else:
        assert scaled_med == pytest.approx(base_med * c, rel=1e-12)


@given(
    st.lists(
        st.tuples(st.floats(min_value=0.0, max_value=50.0, allow_nan=False), st.booleans()),
        min_size=1,
        max_size=60,
    )
)
@settings(max_examples=100, deadline=None)
def test_curve_invariants(pairs):
    curve = km_fit(subjects(pairs))
    n_events = sum(1 for _, e in pairs if e)
    assert int(curve.n_event.sum()) == n_events
    assert curve.n_events_total + curve.n_censored_total == curve.n_subjects == len(pairs)
    # survival strictly decreasing across event rows, inside [0, 1]
    assert np.all(np.diff(curve.survival) < 0)
    if curve.times.size:
        assert np.all(np.diff(curve.times) > 0)
        assert 0.0 <= curve.survival[-1] <= curve.survival[0] < 1.0
        # conservation: first risk set misses only the pre-first censorings,
        # and every subject is an event, an in-gap censoring, or pre-first
        assert curve.n_risk[0] == curve.n_subjects - curve.n_censored_before_first
        accounted = int(curve.n_event.sum() + curve.n_censored.sum()) + curve.n_censored_before_first
        assert accounted == curve.n_subjects
        assert curve.n_risk[-1] == curve.n_event[-1] + curve.n_censored[-1]
