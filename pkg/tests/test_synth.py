import json
import math
import sys
from collections import Counter
from datetime import date, timedelta

import pytest

from trajsurv.ingest import EventKind, build_histories
from trajsurv.pipeline import run_pipeline
from trajsurv.synth import (
    DEFAULT_COHORT,
    CohortSpec,
    HazardSpec,
    generate_cohort,
    latent_times,
    load_cohort_spec,
    sample_piecewise_exp,
    terminal_cause,
    true_survival,
)
from trajsurv.trajectory import DAYS_PER_YEAR, GapConfig, TransitionKind

OBS_END = date(2019, 12, 31)


def small_spec(**overrides):
    base = dict(
        n_students=150,
        entry_year_start=2004,
        entry_year_end=2008,
        dropout=HazardSpec.constant(0.2),
        switch=HazardSpec.constant(0.08),
        graduation=HazardSpec(((0.0, 0.0), (5.0, 0.3))),
        observation_end=OBS_END,
        seed=77,
    )
    base.update(overrides)
    return CohortSpec(**base)


class TestSampler:
    def test_constant_rate_analytic_inversion(self):
        assert sample_piecewise_exp(HazardSpec.constant(1.0), math.exp(-1)) == pytest.approx(1.0, abs=1e-12)
        assert sample_piecewise_exp(HazardSpec.constant(0.5), math.exp(-1)) == pytest.approx(2.0, abs=1e-12)

    def test_delayed_segment_accrues_after_start(self):
        hazard = HazardSpec(((0.0, 0.0), (1.0, 1.0)))
        assert sample_piecewise_exp(hazard, math.exp(-1)) == pytest.approx(2.0, abs=1e-12)

    def test_insufficient_mass_is_inf(self):
        hazard = HazardSpec(((0.0, 0.5), (1.0, 0.0)))
        assert sample_piecewise_exp(hazard, math.exp(-1)) == math.inf

    @pytest.mark.parametrize("u", [0.0, 1.0, -0.3, 2.0])
    def test_u_outside_open_interval_rejected(self, u):
        with pytest.raises(ValueError):
            sample_piecewise_exp(HazardSpec.constant(1.0), u)


class TestTrueSurvival:
    def test_no_time_no_hazard(self):
        assert true_survival(HazardSpec.constant(3.0), 0.0) == 1.0

    def test_exponential_law(self):
        assert true_survival(HazardSpec.constant(1.0), 1.0) == pytest.approx(math.exp(-1), rel=1e-12)

    def test_piecewise_integral(self):
        hazard = HazardSpec(((0.0, 0.2), (2.0, 0.8)))
        assert true_survival(hazard, 3.0) == pytest.approx(math.exp(-1.2), rel=1e-12)

    def test_sample_and_survival_are_inverse(self):
        hazard = HazardSpec(((0.0, 0.3), (2.0, 0.05), (6.0, 1.1)))
        for u in (0.9, 0.5, 0.2, 0.04):
            t = sample_piecewise_exp(hazard, u)
            assert true_survival(hazard, t) == pytest.approx(u, rel=1e-10)


class TestHazardSpecValidation:
    def test_segments_must_start_at_zero(self):
        with pytest.raises(ValueError):
            HazardSpec(((1.0, 0.5),))

    def test_starts_strictly_increasing(self):
        with pytest.raises(ValueError):
            HazardSpec(((0.0, 0.5), (0.0, 0.2)))

    def test_rates_non_negative(self):
        with pytest.raises(ValueError):
            HazardSpec(((0.0, -0.1),))


class TestGenerateCohort:
    def test_identical_seeds_identical_records(self):
        spec = small_spec()
        assert generate_cohort(spec) == generate_cohort(spec)

    def test_different_seeds_differ(self):
        assert generate_cohort(small_spec()) != generate_cohort(small_spec(seed=78))

    def test_first_event_is_entry_enrolment(self):
        spec = small_spec()
        histories, skipped = build_histories(generate_cohort(spec))
        assert not skipped
        assert len(histories) == spec.n_students
        for h in histories:
            assert h.events[0].kind is EventKind.ENROLMENT
            assert h.first_enrolment_date == h.events[0].date
            assert spec.entry_year_start <= h.entry_year <= spec.entry_year_end

    def test_zero_switch_hazard_yields_no_switch_transitions(self):
        spec = small_spec(switch=HazardSpec.constant(0.0))
        histories, _ = build_histories(generate_cohort(spec))
        result = run_pipeline(histories, GapConfig(observation_end=OBS_END))
        assert not any(t.kind is TransitionKind.MAJOR_SWITCH for t in result.transitions)
        assert result.switch.dataset.n_events == 0

    def test_exactly_one_terminal_cause(self):
        spec = small_spec()
        histories, _ = build_histories(generate_cohort(spec))
        by_id = {h.student_id: h for h in histories}
        for index in range(spec.n_students):
            lat = latent_times(spec, index)
            cause = terminal_cause(spec, lat)
            h = by_id[lat.student_id]
            graduations = [e for e in h.events if e.kind is EventKind.GRADUATION]
            if cause == "graduation":
                assert len(graduations) == 1
                assert h.events[-1].kind is EventKind.GRADUATION
            else:
                assert not graduations
            if cause == "dropout":
                expected_day = round(min(lat.dropout_years, lat.graduation_years) * DAYS_PER_YEAR)
                assert h.events[-1].date == lat.entry_date + timedelta(days=expected_day)

    def test_dropout_duration_tracks_latent_time(self):
        spec = small_spec(switch=HazardSpec.constant(0.0), graduation=HazardSpec.constant(0.0))
        histories, _ = build_histories(generate_cohort(spec))
        result = run_pipeline(histories, GapConfig(observation_end=OBS_END))
        records = {r.student_id: r for r in result.dropout.dataset.records}
        checked = 0
        for index in range(spec.n_students):
            lat = latent_times(spec, index)
            if terminal_cause(spec, lat) != "dropout":
                continue
            horizon = (OBS_END - lat.entry_date).days
            drop_day = round(lat.dropout_years * DAYS_PER_YEAR)
            if horizon - drop_day <= 2.0 * DAYS_PER_YEAR:
                continue  # too recent to be detected as dropout
            rec = records[lat.student_id]
            assert rec.is_event
            assert rec.duration_years == pytest.approx(drop_day / DAYS_PER_YEAR, abs=1e-12)
            checked += 1
        assert checked > 30

    def test_switch_bookkeeping_matches_pipeline_counts(self):
        spec = small_spec(switch=HazardSpec.constant(0.25))
        histories, _ = build_histories(generate_cohort(spec))
        result = run_pipeline(histories, GapConfig(observation_end=OBS_END))
        observed = Counter(
            t.date.year for t in result.transitions if t.kind is TransitionKind.MAJOR_SWITCH
        )
        expected = Counter()
        for index in range(spec.n_students):
            lat = latent_times(spec, index)
            horizon_years = (OBS_END - lat.entry_date).days / DAYS_PER_YEAR
            terminal = min(lat.dropout_years, lat.graduation_years, horizon_years)
            if not lat.switch_years < terminal:
                continue
            switch_day = round(lat.switch_years * DAYS_PER_YEAR)
            if switch_day <= 0:
                continue  # switch before any old-major activity is unobservable
            expected[(lat.entry_date + timedelta(days=switch_day)).year] += 1
        assert observed == expected
        assert sum(observed.values()) > 20

    def test_grid_spacing_follows_events_per_year(self):
        spec = small_spec(events_per_year=4, switch=HazardSpec.constant(0.0))
        histories, _ = build_histories(generate_cohort(spec))
        h = histories[0]
        offsets = [(e.date - h.events[0].date).days for e in h.events]
        grid = [round(k * DAYS_PER_YEAR / 4) for k in range(len(offsets))]
        assert offsets[:-1] == grid[: len(offsets) - 1]  # all but a possible terminal event

    def test_invalid_specs_rejected(self):
        with pytest.raises(ValueError):
            small_spec(n_students=0)
        with pytest.raises(ValueError):
            small_spec(events_per_year=0)
        with pytest.raises(ValueError):
            small_spec(entry_year_end=1999)  # inverted range
        with pytest.raises(ValueError):
            small_spec(observation_end=date(2005, 1, 1))  # inside the entry window


class TestCohortSpecConfig:
    def test_json_round_trip(self, tmp_path):
        payload = {
            "n_students": 25,
            "entry_year_start": 2001,
            "entry_year_end": 2002,
            "dropout": 0.3,
            "switch": [[0.0, 0.1], [2.0, 0.0]],
            "graduation": 0.0,
            "observation_end": "2015-06-30",
            "seed": 5,
            "events_per_year": 3,
            "majors": ["AAA", "BBB"],
            "plan_code": "2010",
        }
        path = tmp_path / "cohort.json"
        path.write_text(json.dumps(payload))
        spec = load_cohort_spec(path)
        assert spec.n_students == 25
        assert spec.dropout == HazardSpec.constant(0.3)
        assert spec.switch == HazardSpec(((0.0, 0.1), (2.0, 0.0)))
        assert spec.observation_end == date(2015, 6, 30)
        assert spec.majors == ("AAA", "BBB")
        assert spec.events_per_year == 3

    def test_defaults_fill_missing_fields(self, tmp_path):
        path = tmp_path / "cohort.json"
        path.write_text(json.dumps({"n_students": 7, "seed": 9}))
        spec = load_cohort_spec(path)
        assert spec.n_students == 7 and spec.seed == 9
        assert spec.entry_year_start == DEFAULT_COHORT.entry_year_start

    def test_toml_config(self, tmp_path):
        path = tmp_path / "cohort.toml"
        path.write_text('n_students = 7\nseed = 9\nobservation_end = "2019-12-31"\n')
        if sys.version_info >= (3, 11):
            assert load_cohort_spec(path).n_students == 7
        else:
            with pytest.raises(ValueError, match="TOML"):
                load_cohort_spec(path)
