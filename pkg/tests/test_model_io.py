import json

import numpy as np
import pytest

from airalarm.ann import NetworkConfig, forward, init_network
from airalarm.errors import ModelFormatError
from airalarm.model_io import load_model, save_model
from airalarm.preprocess import RiskThresholds, ScalerParams, ScoreRule


@pytest.fixture
def bundle_parts():
    net = init_network(NetworkConfig(seed=31))
    scaler = ScalerParams(np.zeros(8), np.linspace(1, 8, 8))
    return net, scaler, RiskThresholds(), ScoreRule.MEAN_ALL8


def save(parts, path, **kwargs):
    net, scaler, thresholds, rule = parts
    save_model(net, scaler, thresholds, rule, path, **kwargs)


class TestRoundTrip:
    def test_forward_outputs_preserved(self, bundle_parts, tmp_path, rng):
        path = tmp_path / "model.json"
        save(bundle_parts, path, trained_epochs=42)
        bundle = load_model(path)
        net = bundle_parts[0]
        worst = 0.0
        for _ in range(100):
            x = rng.uniform(0, 1, size=8)
            diff = np.abs(forward(bundle.net, x)[-1] - forward(net, x)[-1])
            worst = max(worst, float(diff.max()))
        assert worst <= 1e-15

    def test_metadata_preserved(self, bundle_parts, tmp_path):
        path = tmp_path / "model.json"
        save(bundle_parts, path, trained_epochs=7)
        bundle = load_model(path)
        assert bundle.trained_epochs == 7
        assert bundle.seed == 31
        assert bundle.rule is ScoreRule.MEAN_ALL8
        assert bundle.thresholds == RiskThresholds()
        np.testing.assert_array_equal(bundle.scaler.maxs, np.linspace(1, 8, 8))

    def test_save_twice_identical_bytes(self, bundle_parts, tmp_path):
        first = tmp_path / "a.json"
        second = tmp_path / "b.json"
        save(bundle_parts, first)
        save(bundle_parts, second)
        assert first.read_bytes() == second.read_bytes()

    def test_key_order_is_fixed(self, bundle_parts, tmp_path):
        path = tmp_path / "model.json"
        save(bundle_parts, path)
        doc = json.loads(path.read_text())
        assert list(doc) == ["format_version", "layer_sizes", "activation", "weights",
                             "biases", "scaler", "thresholds", "score_rule", "seed",
                             "trained_epochs"]
        assert doc["format_version"] == 1
        assert doc["activation"] == "sigmoid"


def _tamper(path, mutate):
    doc = json.loads(path.read_text())
    mutate(doc)
    path.write_text(json.dumps(doc))


class TestValidation:
    @pytest.fixture
    def saved(self, bundle_parts, tmp_path):
        path = tmp_path / "model.json"
        save(bundle_parts, path)
        return path

    def test_unknown_version(self, saved):
        _tamper(saved, lambda d: d.update(format_version=99))
        with pytest.raises(ModelFormatError, match="format_version"):
            load_model(saved)

    def test_dimension_mismatch_names_field(self, saved):
        _tamper(saved, lambda d: d["weights"][0].pop())
        with pytest.raises(ModelFormatError, match=r"weights\[0\]"):
            load_model(saved)

    def test_bias_length_mismatch(self, saved):
        _tamper(saved, lambda d: d["biases"][1].append(0.5))
        with pytest.raises(ModelFormatError, match=r"biases\[1\]"):
            load_model(saved)

    def test_non_finite_parameter(self, saved):
        _tamper(saved, lambda d: d["weights"][0][0].__setitem__(0, float("nan")))
        with pytest.raises(ModelFormatError, match="non-finite"):
            load_model(saved)

    def test_missing_field(self, saved):
        _tamper(saved, lambda d: d.pop("scaler"))
        with pytest.raises(ModelFormatError, match="scaler"):
            load_model(saved)

    def test_bad_scaler_ordering(self, saved):
        def swap(d):
            d["scaler"]["mins"], d["scaler"]["maxs"] = d["scaler"]["maxs"], d["scaler"]["mins"]
        _tamper(saved, swap)
        with pytest.raises(ModelFormatError, match="scaler"):
            load_model(saved)

    def test_unknown_score_rule(self, saved):
        _tamper(saved, lambda d: d.update(score_rule="median"))
        with pytest.raises(ModelFormatError, match="score_rule"):
            load_model(saved)

    def test_not_json(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text("definitely not json{")
        with pytest.raises(ModelFormatError, match="JSON"):
            load_model(path)

    def test_missing_file_is_io_error(self, tmp_path):
        with pytest.raises(OSError):
            load_model(tmp_path / "nope.json")
