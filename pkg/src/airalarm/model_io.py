"""Model persistence: one UTF-8 JSON document with a fixed key order.

The file bundles everything needed to classify a raw frame: the network
parameters plus the scaler, thresholds, and score rule the training run
used. Floats serialize as Python's shortest round-trip decimals, so saving
is byte-deterministic and a load reproduces the forward pass bit-for-bit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .ann import Network, NetworkConfig
from .errors import ModelFormatError
from .ingest import ChannelId
from .preprocess import RiskThresholds, ScalerParams, ScoreRule

FORMAT_VERSION = 1


@dataclass(frozen=True)
class ModelBundle:
    """A loaded model file: network plus preprocessing provenance."""

    net: Network
    scaler: ScalerParams
    thresholds: RiskThresholds
    rule: ScoreRule
    seed: int
    trained_epochs: int


def save_model(
    net: Network,
    scaler: ScalerParams,
    thresholds: RiskThresholds,
    rule: ScoreRule,
    path: str | Path,
    trained_epochs: int = 0,
) -> None:
    """Write the model file; identical inputs produce identical bytes."""
    net.validate()
    doc = {
        "format_version": FORMAT_VERSION,
        "layer_sizes": [int(s) for s in net.layer_sizes],
        "activation": net.activation,
        "weights": [w.tolist() for w in net.weights],
        "biases": [b.tolist() for b in net.biases],
        "scaler": {
            "mins": scaler.mins.tolist(),
            "maxs": scaler.maxs.tolist(),
            "channels": [c.name.lower() for c in ChannelId],
        },
        "thresholds": {
            "low_upper": thresholds.low_upper,
            "high_lower": thresholds.high_lower,
        },
        "score_rule": rule.value,
        "seed": int(net.config.seed) if net.config is not None else 0,
        "trained_epochs": int(trained_epochs),
    }
    Path(path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


def _field(doc: dict, name: str):
    if name not in doc:
        raise ModelFormatError(f"model file is missing field {name!r}")
    return doc[name]


def _finite_array(values, name: str, shape: tuple[int, ...]) -> np.ndarray:
    try:
        arr = np.asarray(values, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ModelFormatError(f"field {name!r} is not numeric") from exc
    if arr.shape != shape:
        raise ModelFormatError(f"field {name!r} has shape {arr.shape}, expected {shape}")
    if not np.isfinite(arr).all():
        raise ModelFormatError(f"field {name!r} contains non-finite values")
    return arr


def load_model(path: str | Path) -> ModelBundle:
    """Read and validate a model file; every type invariant is re-checked."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"model file is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ModelFormatError("model file must contain a JSON object")

    version = _field(doc, "format_version")
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"unknown format_version {version!r}")

    sizes = _field(doc, "layer_sizes")
    if (not isinstance(sizes, list) or len(sizes) < 2
            or any(not isinstance(s, int) or s <= 0 for s in sizes)):
        raise ModelFormatError(f"field 'layer_sizes' must be positive integers, got {sizes!r}")
    sizes = tuple(sizes)

    activation = _field(doc, "activation")
    if activation != "sigmoid":
        raise ModelFormatError(f"unsupported activation {activation!r}")

    raw_w = _field(doc, "weights")
    raw_b = _field(doc, "biases")
    if not isinstance(raw_w, list) or len(raw_w) != len(sizes) - 1:
        raise ModelFormatError(f"field 'weights' must hold {len(sizes) - 1} matrices")
    if not isinstance(raw_b, list) or len(raw_b) != len(sizes) - 1:
        raise ModelFormatError(f"field 'biases' must hold {len(sizes) - 1} vectors")
    weights = [
        _finite_array(raw_w[l], f"weights[{l}]", (sizes[l + 1], sizes[l]))
        for l in range(len(sizes) - 1)
    ]
    biases = [
        _finite_array(raw_b[l], f"biases[{l}]", (sizes[l + 1],))
        for l in range(len(sizes) - 1)
    ]

    raw_scaler = _field(doc, "scaler")
    mins = _finite_array(_field(raw_scaler, "mins"), "scaler.mins", (sizes[0],))
    maxs = _finite_array(_field(raw_scaler, "maxs"), "scaler.maxs", (sizes[0],))
    try:
        scaler = ScalerParams(mins, maxs)
    except ValueError as exc:
        raise ModelFormatError(f"invalid scaler: {exc}") from exc

    raw_thresholds = _field(doc, "thresholds")
    try:
        thresholds = RiskThresholds(
            float(_field(raw_thresholds, "low_upper")),
            float(_field(raw_thresholds, "high_lower")),
        )
    except (TypeError, ValueError) as exc:
        raise ModelFormatError(f"invalid thresholds: {exc}") from exc

    try:
        rule = ScoreRule(_field(doc, "score_rule"))
    except ValueError as exc:
        raise ModelFormatError(f"unknown score_rule {doc.get('score_rule')!r}") from exc

    seed = _field(doc, "seed")
    trained_epochs = _field(doc, "trained_epochs")
    if not isinstance(seed, int) or not isinstance(trained_epochs, int):
        raise ModelFormatError("fields 'seed' and 'trained_epochs' must be integers")

    config = None
    if len(sizes) >= 3:
        config = NetworkConfig(layer_sizes=sizes, activation=activation, seed=seed)
    net = Network(weights, biases, activation, config)
    net.validate()
    return ModelBundle(net, scaler, thresholds, rule, seed, trained_epochs)
