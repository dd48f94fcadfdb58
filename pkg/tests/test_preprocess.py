import datetime as dt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from airalarm.errors import DataError
from airalarm.ingest import ChannelId, RawRecord
from airalarm.preprocess import (LabeledExample, RiskLabel, RiskThresholds,
                                 ScalerParams, ScoreRule, apply_scaler,
                                 build_examples, drop_incomplete, fit_scaler,
                                 invert_scaler, label_risk, risk_score,
                                 split_train_test)


def record(base: float, missing: ChannelId | None = None, hour: int = 0) -> RawRecord:
    channels = {c: base + float(c) for c in ChannelId}
    if missing is not None:
        del channels[missing]
    return RawRecord(dt.date(2004, 3, 10), dt.time(hour % 24, 0), channels)


def examples_from_scores(scores) -> list[LabeledExample]:
    out = []
    for i, s in enumerate(scores):
        features = np.full(8, s)
        out.append(LabeledExample(features, float(s), label_risk(float(s)), i))
    return out


class TestDropIncomplete:
    def test_empty(self):
        assert drop_incomplete([]) == []

    def test_three_of_ten_incomplete(self):
        records = [record(i, missing=ChannelId.NOX if i in (2, 5, 9) else None, hour=i)
                   for i in range(10)]
        rows = drop_incomplete(records)
        assert len(rows) == 7
        # original relative order: row i starts at value i
        kept = [int(row[0]) for row in rows]
        assert kept == [0, 1, 3, 4, 6, 7, 8]

    def test_all_complete_preserves_length(self):
        records = [record(i, hour=i) for i in range(5)]
        assert len(drop_incomplete(records)) == 5


class TestScaler:
    def test_min_max_by_definition(self):
        rows = [np.array([1.0, 0, 0, 0, 0, 0, 0, 0]),
                np.array([3.0, 0, 0, 0, 0, 0, 0, 0])]
        params = fit_scaler(rows)
        assert params.mins[0] == 1.0 and params.maxs[0] == 3.0

    def test_single_row_degenerate(self):
        row = np.arange(8.0)
        params = fit_scaler([row])
        np.testing.assert_array_equal(params.mins, row)
        np.testing.assert_array_equal(params.maxs, row)

    def test_five_row_fixture_matches_bruteforce(self, rng):
        rows = [rng.uniform(-50, 50, size=8) for _ in range(5)]
        params = fit_scaler(rows)
        for c in range(8):
            # independent elementwise min/max
            lo = hi = rows[0][c]
            for row in rows[1:]:
                lo = min(lo, row[c])
                hi = max(hi, row[c])
            assert params.mins[c] == lo
            assert params.maxs[c] == hi

    def test_empty_rows_error(self):
        with pytest.raises(DataError, match="empty dataset"):
            fit_scaler([])

    def test_midpoint(self):
        params = ScalerParams(np.full(8, 1.0), np.full(8, 3.0))
        np.testing.assert_array_equal(apply_scaler(params, np.full(8, 2.0)), np.full(8, 0.5))

    def test_degenerate_channel_scales_to_zero(self):
        params = ScalerParams(np.full(8, 7.0), np.full(8, 7.0))
        np.testing.assert_array_equal(apply_scaler(params, np.full(8, 123.0)), np.zeros(8))

    def test_clamps_out_of_range(self):
        params = ScalerParams(np.zeros(8), np.full(8, 10.0))
        assert apply_scaler(params, np.full(8, 14.0))[0] == 1.0
        assert apply_scaler(params, np.full(8, -3.0))[0] == 0.0

    def test_mins_above_maxs_rejected(self):
        with pytest.raises(ValueError):
            ScalerParams(np.full(8, 2.0), np.full(8, 1.0))

    @given(raw=st.lists(st.floats(-1e6, 1e6), min_size=8, max_size=8))
    @settings(max_examples=100)
    def test_scale_unscale_roundtrip(self, raw):
        params = ScalerParams(np.full(8, -1e6), np.full(8, 1e6))
        raw = np.asarray(raw)
        recovered = invert_scaler(params, apply_scaler(params, raw))
        np.testing.assert_allclose(recovered, raw, rtol=1e-12, atol=1e-6)


class TestRiskScore:
    def test_all_zero(self):
        assert risk_score(np.zeros(8)) == 0.0

    def test_all_one(self):
        assert risk_score(np.ones(8)) == 1.0

    def test_known_row_mean8(self):
        features = np.array([0.66, 0.79, 0.79, 0.60, 0.58, 0.6, 0.6, 0.8])
        # independent left-to-right summation oracle
        total = 0.0
        for v in (0.66, 0.79, 0.79, 0.60, 0.58, 0.6, 0.6, 0.8):
            total += v
        assert abs(risk_score(features) - total / 8.0) < 1e-12
        assert abs(risk_score(features) - 0.6775) < 1e-12

    def test_known_row_mean5(self):
        features = np.array([0.66, 0.79, 0.79, 0.60, 0.58, 0.6, 0.6, 0.8])
        assert abs(risk_score(features, ScoreRule.MEAN_POLLUTANTS5) - 0.684) < 1e-12


class TestLabelRisk:
    @pytest.mark.parametrize("score,expected", [
        (0.65, RiskLabel.HIGH),
        (0.45, RiskLabel.MEDIUM),
        (0.60, RiskLabel.MEDIUM),
        (0.30, RiskLabel.MEDIUM),
        (0.29, RiskLabel.LOW),
        (0.0, RiskLabel.LOW),
        (1.0, RiskLabel.HIGH),
    ])
    def test_bands(self, score, expected):
        assert label_risk(score) is expected

    @pytest.mark.parametrize("score", [-0.1, 1.1, 2.0])
    def test_out_of_range_rejected(self, score):
        with pytest.raises(ValueError):
            label_risk(score)

    def test_invalid_thresholds_rejected(self):
        with pytest.raises(ValueError):
            RiskThresholds(0.6, 0.3)
        with pytest.raises(ValueError):
            RiskThresholds(0.0, 0.6)

    @given(score=st.floats(0.0, 1.0))
    @settings(max_examples=200)
    def test_only_the_cut_points_matter(self, score):
        # perturbing a score within its band never changes the class
        label = label_risk(score)
        if label is RiskLabel.LOW:
            nudged = min(score + 0.001, 0.2999)
        elif label is RiskLabel.HIGH:
            nudged = max(score - 0.001, 0.6001)
        else:
            nudged = min(max(score, 0.3), 0.6)
        assert label_risk(nudged) is label


class TestBuildExamples:
    def test_labels_consistent_with_scores(self, rng):
        rows = [rng.uniform(0, 100, size=8) for _ in range(50)]
        scaler = fit_scaler(rows)
        for ex in build_examples(rows, scaler):
            assert ex.label is label_risk(ex.score)
            assert 0.0 <= ex.score <= 1.0
            assert np.all((ex.features >= 0) & (ex.features <= 1))

    def test_origins_are_positions(self, rng):
        rows = [rng.uniform(0, 1, size=8) for _ in range(10)]
        examples = build_examples(rows, fit_scaler(rows))
        assert [ex.origin for ex in examples] == list(range(10))


class TestSplit:
    def test_70_30(self):
        train, test = split_train_test(examples_from_scores([0.5] * 10), 0.7, seed=1)
        assert len(train) == 7 and len(test) == 3

    def test_floor_rule(self):
        train, test = split_train_test(examples_from_scores([0.5] * 3), 0.5, seed=1)
        assert len(train) == 1 and len(test) == 2

    def test_same_seed_same_split(self):
        examples = examples_from_scores(np.linspace(0, 1, 20))
        first = split_train_test(examples, 0.7, seed=9)
        second = split_train_test(examples, 0.7, seed=9)
        assert [e.origin for e in first[0]] == [e.origin for e in second[0]]
        assert [e.origin for e in first[1]] == [e.origin for e in second[1]]

    def test_fraction_out_of_range(self):
        with pytest.raises(ValueError):
            split_train_test(examples_from_scores([0.5] * 4), 1.5, seed=1)

    @given(n=st.integers(1, 60), fraction=st.floats(0.01, 0.99), seed=st.integers(0, 99))
    @settings(max_examples=100)
    def test_partition_property(self, n, fraction, seed):
        examples = examples_from_scores([0.4] * n)
        train, test = split_train_test(examples, fraction, seed)
        assert len(train) == int(np.floor(n * fraction))
        origins = sorted(e.origin for e in train) + sorted(e.origin for e in test)
        assert sorted(origins) == list(range(n))
