"""Evaluation surface: confusion matrix, agreement statistics, per-class
metrics with ROC areas, error measures, and stratified k-fold CV.

Convention notes that differ from some libraries:

* The confusion matrix is indexed ``counts[predicted][actual]`` (rows are
  predictions), and text reports display classes in the order High, Normal,
  Low ("Normal" is the display alias of Medium).
* Any 0/0 metric ratio is defined as 0 so reports stay total; classes with
  zero support carry weight 0 in the weighted average.
* Kappa is evaluated in integer arithmetic,
  (N*trace - sum_k row_k*col_k) / (N^2 - sum_k row_k*col_k),
  which equals (p_o - p_e)/(1 - p_e) without rounding on the way.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .ann import Network, NetworkConfig, forward_batch, init_network, train
from .preprocess import LabeledExample, RiskLabel

N_CLASSES = len(RiskLabel)

#: Display order and names mirror the reference tables.
DISPLAY_ORDER = (RiskLabel.HIGH, RiskLabel.MEDIUM, RiskLabel.LOW)
DISPLAY_NAMES = {RiskLabel.HIGH: "High", RiskLabel.MEDIUM: "Normal", RiskLabel.LOW: "Low"}


@dataclass(frozen=True)
class ConfusionMatrix:
    """counts[p][a] = instances predicted as class p whose actual class is a."""

    counts: np.ndarray

    def __post_init__(self) -> None:
        counts = np.asarray(self.counts, dtype=np.int64)
        object.__setattr__(self, "counts", counts)
        if counts.shape != (N_CLASSES, N_CLASSES):
            raise ValueError(f"expected a {N_CLASSES}x{N_CLASSES} matrix, got {counts.shape}")
        if np.any(counts < 0):
            raise ValueError("confusion matrix entries must be non-negative")

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def predicted_totals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    def actual_totals(self) -> np.ndarray:
        return self.counts.sum(axis=0)


@dataclass(frozen=True)
class ClassMetrics:
    tp_rate: float
    fp_rate: float
    precision: float
    recall: float
    f_measure: float
    roc_area: float
    support: int


@dataclass(frozen=True)
class EvalReport:
    matrix: ConfusionMatrix
    accuracy: float
    kappa: float
    mae: float
    rmse: float
    rae_percent: float
    rrse_percent: float
    per_class: list[ClassMetrics]
    weighted_avg: ClassMetrics


@dataclass
class CVReport:
    k: int
    report: EvalReport
    fold_accuracies: list[float]
    warnings: list[str] = field(default_factory=list)


def confusion_matrix(
    predicted: Sequence[RiskLabel], actual: Sequence[RiskLabel]
) -> ConfusionMatrix:
    if len(predicted) != len(actual):
        raise ValueError(f"got {len(predicted)} predictions for {len(actual)} actuals")
    if len(predicted) == 0:
        raise ValueError("cannot build a confusion matrix from zero instances")
    counts = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    for p, a in zip(predicted, actual):
        counts[int(p), int(a)] += 1
    return ConfusionMatrix(counts)


def summary_stats(matrix: ConfusionMatrix) -> tuple[float, float]:
    """(accuracy, kappa). kappa is 0 when chance agreement is already 1."""
    n = matrix.total
    if n == 0:
        raise ValueError("empty confusion matrix")
    trace = int(np.trace(matrix.counts))
    marg = int(matrix.predicted_totals() @ matrix.actual_totals())
    accuracy = trace / n
    denominator = n * n - marg
    kappa = 0.0 if denominator == 0 else (n * trace - marg) / denominator
    return accuracy, kappa


def regression_errors(
    outputs: np.ndarray, targets: np.ndarray
) -> tuple[float, float, float, float]:
    """(mae, rmse, rae_percent, rrse_percent) over all output components.

    The relative measures are normalized by the predict-the-mean baseline:
    per output component, the mean of the targets.
    """
    outputs = np.asarray(outputs, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if outputs.shape != targets.shape or outputs.ndim != 2:
        raise ValueError(f"outputs {outputs.shape} and targets {targets.shape} must match (n, k)")
    if outputs.shape[0] == 0:
        raise ValueError("cannot score an empty batch")
    diff = outputs - targets
    mae = float(np.mean(np.abs(diff)))
    rmse = float(np.sqrt(np.mean(diff * diff)))
    centered = targets - targets.mean(axis=0)
    abs_base = float(np.sum(np.abs(centered)))
    sq_base = float(np.sum(centered * centered))
    if abs_base == 0.0 or sq_base == 0.0:
        raise ValueError("undefined baseline: all targets are identical")
    rae = 100.0 * float(np.sum(np.abs(diff))) / abs_base
    rrse = 100.0 * float(np.sqrt(np.sum(diff * diff) / sq_base))
    return mae, rmse, rae, rrse


def _average_ranks(scores: np.ndarray) -> np.ndarray:
    """1-based ranks, ties replaced by the mean rank of the tie group."""
    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty(len(scores), dtype=np.float64)
    i = 0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and scores[order[j + 1]] == scores[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def roc_auc(scores: Sequence[float], positives: Sequence[bool]) -> float:
    """Rank-based AUC: P(random positive outscores random negative), ties = 1/2."""
    scores = np.asarray(scores, dtype=np.float64)
    positives = np.asarray(positives, dtype=bool)
    if scores.shape != positives.shape or scores.ndim != 1:
        raise ValueError("scores and positives must be equal-length vectors")
    n_pos = int(positives.sum())
    n_neg = len(positives) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("undefined AUC: need at least one positive and one negative")
    ranks = _average_ranks(scores)
    pos_rank_sum = float(ranks[positives].sum())
    return (pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def _ratio(num: float, den: float) -> float:
    return 0.0 if den == 0 else num / den


def per_class_metrics(
    matrix: ConfusionMatrix,
    scores: np.ndarray,
    actuals: Sequence[RiskLabel],
) -> tuple[list[ClassMetrics], ClassMetrics]:
    """One-vs-rest metrics per class plus the support-weighted average.

    ``scores[i][k]`` is the network activation for class k on instance i;
    the per-class ROC area treats it as the positive-class score.
    """
    scores = np.asarray(scores, dtype=np.float64)
    n = matrix.total
    actual_idx = np.asarray([int(a) for a in actuals], dtype=np.int64)
    if scores.shape != (n, N_CLASSES) or len(actual_idx) != n:
        raise ValueError("scores/actuals do not match the matrix total")

    rows = matrix.predicted_totals()
    cols = matrix.actual_totals()
    per_class: list[ClassMetrics] = []
    for k in range(N_CLASSES):
        tp = int(matrix.counts[k, k])
        fp = int(rows[k]) - tp
        fn = int(cols[k]) - tp
        tn = n - tp - fp - fn
        tp_rate = _ratio(tp, tp + fn)
        fp_rate = _ratio(fp, fp + tn)
        precision = _ratio(tp, tp + fp)
        f_measure = _ratio(2.0 * precision * tp_rate, precision + tp_rate)
        try:
            roc = roc_auc(scores[:, k], actual_idx == k)
        except ValueError:
            roc = 0.0
        per_class.append(ClassMetrics(tp_rate, fp_rate, precision, tp_rate,
                                      f_measure, roc, int(cols[k])))

    total_support = sum(m.support for m in per_class)
    def wavg(get) -> float:
        return _ratio(sum(get(m) * m.support for m in per_class), total_support)
    weighted = ClassMetrics(
        wavg(lambda m: m.tp_rate), wavg(lambda m: m.fp_rate),
        wavg(lambda m: m.precision), wavg(lambda m: m.recall),
        wavg(lambda m: m.f_measure), wavg(lambda m: m.roc_area),
        total_support,
    )
    return per_class, weighted


def evaluate(
    outputs: np.ndarray,
    predicted: Sequence[RiskLabel],
    actual: Sequence[RiskLabel],
) -> EvalReport:
    """Full report from one evaluation pass (outputs are the 3-score rows)."""
    matrix = confusion_matrix(predicted, actual)
    accuracy, kappa = summary_stats(matrix)
    targets = np.zeros((len(actual), N_CLASSES))
    for i, a in enumerate(actual):
        targets[i, int(a)] = 1.0
    mae, rmse, rae, rrse = regression_errors(outputs, targets)
    per_class, weighted = per_class_metrics(matrix, outputs, actual)
    return EvalReport(matrix, accuracy, kappa, mae, rmse, rae, rrse, per_class, weighted)


def evaluate_network(net: Network, examples: Sequence[LabeledExample]) -> EvalReport:
    """Evaluate a trained network on labeled examples."""
    if len(examples) == 0:
        raise ValueError("cannot evaluate on an empty example list")
    X = np.asarray([ex.features for ex in examples], dtype=np.float64)
    outputs = forward_batch(net, X)
    predicted = [RiskLabel(int(i)) for i in np.argmax(outputs, axis=1)]
    actual = [ex.label for ex in examples]
    return evaluate(outputs, predicted, actual)


def stratified_folds(
    labels: Sequence[RiskLabel], k: int, seed: int
) -> tuple[list[list[int]], list[str]]:
    """Per class, shuffle then deal round-robin into k folds.

    Returns fold index lists plus warnings for classes with fewer than k
    members (stratification is best-effort for those).
    """
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    warnings: list[str] = []
    for cls in RiskLabel:
        members = [i for i, lab in enumerate(labels) if lab == cls]
        if len(members) < k:
            warnings.append(
                f"class {cls.display_name} has {len(members)} example(s), fewer than k={k}"
            )
        order = rng.permutation(len(members))
        for pos, idx in enumerate(order):
            folds[pos % k].append(members[idx])
    for fold in folds:
        fold.sort()
    return folds, warnings


def stratified_kfold_cv(
    data: Sequence[LabeledExample],
    k: int,
    seed: int,
    config: NetworkConfig,
) -> CVReport:
    """Train on k-1 folds, evaluate on the held-out one, pool the results.

    Every example is evaluated exactly once; the pooled confusion matrix and
    scores feed one aggregate EvalReport. Fold f trains with the config seed
    offset by f so each fold owns its own parameter stream.
    """
    if len(data) == 0:
        raise ValueError("cannot cross-validate an empty dataset")
    folds, warnings = stratified_folds([ex.label for ex in data], k, seed)

    pooled_outputs = np.zeros((len(data), N_CLASSES))
    pooled_predicted: list[RiskLabel | None] = [None] * len(data)
    fold_accuracies: list[float] = []
    for f, held_out in enumerate(folds):
        if not held_out:
            continue
        train_set = [data[i] for fold in folds if fold is not held_out for i in fold]
        if not train_set:
            raise ValueError(f"fold {f} leaves no training data (k too large)")
        fold_config = replace(config, seed=config.seed + f)
        net, _ = train(init_network(fold_config), train_set, fold_config)
        X = np.asarray([data[i].features for i in held_out], dtype=np.float64)
        outputs = forward_batch(net, X)
        hits = 0
        for row, i in enumerate(held_out):
            pooled_outputs[i] = outputs[row]
            label = RiskLabel(int(np.argmax(outputs[row])))
            pooled_predicted[i] = label
            hits += label == data[i].label
        fold_accuracies.append(hits / len(held_out))

    predicted = [p for p in pooled_predicted if p is not None]
    if len(predicted) != len(data):
        raise ValueError("internal error: some examples were never evaluated")
    report = evaluate(pooled_outputs, predicted, [ex.label for ex in data])
    return CVReport(k, report, fold_accuracies, warnings)


def report_to_dict(report: EvalReport) -> dict:
    """Machine-readable form; class arrays are in Low, Medium, High order."""
    def class_dict(m: ClassMetrics) -> dict:
        return {
            "tp_rate": m.tp_rate, "fp_rate": m.fp_rate, "precision": m.precision,
            "recall": m.recall, "f_measure": m.f_measure, "roc_area": m.roc_area,
            "support": m.support,
        }
    return {
        "classes": [label.name.lower() for label in RiskLabel],
        "accuracy": report.accuracy,
        "kappa": report.kappa,
        "mae": report.mae,
        "rmse": report.rmse,
        "rae_percent": report.rae_percent,
        "rrse_percent": report.rrse_percent,
        "confusion_matrix": {
            "orientation": "rows=predicted, columns=actual",
            "counts": report.matrix.counts.tolist(),
        },
        "per_class": {label.name.lower(): class_dict(m)
                      for label, m in zip(RiskLabel, report.per_class)},
        "weighted_avg": class_dict(report.weighted_avg),
    }


def render_report_text(report: EvalReport) -> str:
    """Human-readable report mirroring the summary / by-class / matrix tables."""
    n = report.matrix.total
    correct = int(np.trace(report.matrix.counts))
    lines = [
        "=== Summary ===",
        f"Correctly classified instances    {correct:6d}   {100.0 * report.accuracy:8.4f} %",
        f"Incorrectly classified instances  {n - correct:6d}   {100.0 * (1 - report.accuracy):8.4f} %",
        f"Kappa statistic                   {report.kappa:8.4f}",
        f"Mean absolute error               {report.mae:8.4f}",
        f"Root mean squared error           {report.rmse:8.4f}",
        f"Relative absolute error           {report.rae_percent:8.4f} %",
        f"Root relative squared error       {report.rrse_percent:8.4f} %",
        f"Total number of instances         {n:6d}",
        "",
        "=== Detailed accuracy by class ===",
        "TP Rate  FP Rate  Precision  Recall  F-Measure  ROC Area  Class",
    ]
    def row(m: ClassMetrics, name: str) -> str:
        return (f"{m.tp_rate:7.3f}  {m.fp_rate:7.3f}  {m.precision:9.3f}  "
                f"{m.recall:6.3f}  {m.f_measure:9.3f}  {m.roc_area:8.3f}  {name}")
    for label in DISPLAY_ORDER:
        lines.append(row(report.per_class[int(label)], DISPLAY_NAMES[label]))
    lines.append(row(report.weighted_avg, "Weighted avg."))
    lines.append("")
    lines.append("=== Confusion matrix (rows = predicted, columns = actual) ===")
    letters = [chr(ord("a") + i) for i in range(len(DISPLAY_ORDER))]
    lines.append("  ".join(f"{letter:>6}" for letter in letters) + "   <- actual class")
    for letter, label in zip(letters, DISPLAY_ORDER):
        counts = [report.matrix.counts[int(label), int(actual)] for actual in DISPLAY_ORDER]
        lines.append("  ".join(f"{c:6d}" for c in counts)
                     + f"   {letter} = predicted {DISPLAY_NAMES[label]}")
    return "\n".join(lines) + "\n"
