"""Cleaning, scaling, labeling, and splitting.

Incomplete rows are dropped (never imputed), features are min-max scaled to
[0,1], a scalar risk score is derived from the scaled features, and the
score is cut into three classes: below 0.3 is low risk, 0.3 to 0.6 inclusive
is medium, above 0.6 is high.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DataError
from .ingest import ChannelId, RawRecord, select_features


class RiskLabel(enum.IntEnum):
    """Risk classes with fixed indices; one-hot targets use these positions."""

    LOW = 0
    MEDIUM = 1
    HIGH = 2

    @property
    def display_name(self) -> str:
        return self.name.capitalize()


class ScoreRule(enum.Enum):
    """How the scalar risk score is derived from the 8 scaled features."""

    MEAN_ALL8 = "mean8"
    MEAN_POLLUTANTS5 = "mean5"


@dataclass(frozen=True)
class RiskThresholds:
    low_upper: float = 0.3
    high_lower: float = 0.6

    def __post_init__(self) -> None:
        if not (0.0 < self.low_upper < self.high_lower < 1.0):
            raise ValueError(
                f"thresholds must satisfy 0 < low_upper < high_lower < 1, "
                f"got {self.low_upper} and {self.high_lower}"
            )


@dataclass(frozen=True)
class ScalerParams:
    """Per-channel minima and maxima, in raw units."""

    mins: np.ndarray
    maxs: np.ndarray

    def __post_init__(self) -> None:
        mins = np.asarray(self.mins, dtype=np.float64)
        maxs = np.asarray(self.maxs, dtype=np.float64)
        object.__setattr__(self, "mins", mins)
        object.__setattr__(self, "maxs", maxs)
        if mins.shape != maxs.shape or mins.ndim != 1:
            raise ValueError("mins and maxs must be 1-d vectors of equal length")
        if not (np.isfinite(mins).all() and np.isfinite(maxs).all()):
            raise ValueError("scaler parameters must be finite")
        if np.any(mins > maxs):
            raise ValueError("every min must be <= the matching max")


@dataclass(frozen=True)
class LabeledExample:
    features: np.ndarray  # 8 scaled values in [0,1]
    score: float
    label: RiskLabel
    origin: int  # position in the cleaned dataset, 0..n-1


def drop_incomplete(records: Sequence[RawRecord]) -> list[np.ndarray]:
    """Keep only rows with all 8 channels present, in input order."""
    rows = []
    for record in records:
        row = select_features(record)
        if row is not None:
            rows.append(row)
    return rows


def fit_scaler(rows: Sequence[np.ndarray]) -> ScalerParams:
    """Componentwise min/max over the rows."""
    if len(rows) == 0:
        raise DataError("empty dataset: cannot fit scaler")
    stacked = np.asarray(rows, dtype=np.float64)
    return ScalerParams(stacked.min(axis=0), stacked.max(axis=0))


def apply_scaler(params: ScalerParams, row: np.ndarray) -> np.ndarray:
    """Min-max scale one raw row to [0,1].

    Degenerate channels (min == max) map to 0.0; out-of-range inputs clamp
    rather than extrapolate, so live frames beyond the training range stay
    in the network's trained domain.
    """
    row = np.asarray(row, dtype=np.float64)
    span = params.maxs - params.mins
    safe = np.where(span > 0.0, span, 1.0)
    scaled = np.where(span > 0.0, (row - params.mins) / safe, 0.0)
    return np.clip(scaled, 0.0, 1.0)


def invert_scaler(params: ScalerParams, features: np.ndarray) -> np.ndarray:
    """Map scaled values back to raw units (non-degenerate channels only)."""
    return params.mins + np.asarray(features, dtype=np.float64) * (params.maxs - params.mins)


def risk_score(features: np.ndarray, rule: ScoreRule = ScoreRule.MEAN_ALL8) -> float:
    """Scalar risk in [0,1]: mean of all 8 scaled features, or of the 5 pollutants."""
    features = np.asarray(features, dtype=np.float64)
    if rule is ScoreRule.MEAN_POLLUTANTS5:
        return float(np.mean(features[:5]))
    return float(np.mean(features))


def label_risk(score: float, thresholds: RiskThresholds = RiskThresholds()) -> RiskLabel:
    """Cut a score into Low / Medium / High; Medium is the closed middle band."""
    if not (0.0 <= score <= 1.0):
        raise ValueError(f"risk score must be in [0,1], got {score}")
    if score > thresholds.high_lower:
        return RiskLabel.HIGH
    if score >= thresholds.low_upper:
        return RiskLabel.MEDIUM
    return RiskLabel.LOW


def build_examples(
    rows: Sequence[np.ndarray],
    scaler: ScalerParams,
    thresholds: RiskThresholds = RiskThresholds(),
    rule: ScoreRule = ScoreRule.MEAN_ALL8,
) -> list[LabeledExample]:
    """Scale, score, and label each complete row; origin is its position."""
    examples = []
    for origin, row in enumerate(rows):
        features = apply_scaler(scaler, row)
        score = risk_score(features, rule)
        examples.append(LabeledExample(features, score, label_risk(score, thresholds), origin))
    return examples


def split_indices(n: int, train_fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Seeded shuffle of 0..n-1 split at floor(n * train_fraction)."""
    if not (0.0 < train_fraction < 1.0):
        raise ValueError(f"train fraction must be in (0,1), got {train_fraction}")
    perm = np.random.default_rng(seed).permutation(n)
    cut = int(np.floor(n * train_fraction))
    return perm[:cut], perm[cut:]


def split_train_test(
    examples: Sequence[LabeledExample],
    train_fraction: float,
    seed: int,
) -> tuple[list[LabeledExample], list[LabeledExample]]:
    """Shuffle with the seeded PRNG, then split at floor(n * train_fraction)."""
    if len(examples) == 0:
        raise DataError("empty dataset: nothing to split")
    train_idx, test_idx = split_indices(len(examples), train_fraction, seed)
    return [examples[i] for i in train_idx], [examples[i] for i in test_idx]
