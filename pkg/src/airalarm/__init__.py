"""Air-quality risk classification and alert replay.

Pipeline: parse the UCI-style air-quality CSV, drop incomplete rows,
min-max scale the 8 channels, derive 3-class risk labels, train a small
sigmoid feedforward network by online backpropagation, evaluate it
(confusion matrix, kappa, per-class metrics, ROC areas, stratified CV),
and replay sensor streams through the trained model to emit debounced
alert events.
"""

__version__ = "0.1.0"

from .alarm import (AlarmPolicy, AlarmState, AlertEvent, AlertLog, SensorFrame,
                    alarm_step, classify_frame, replay)
from .ann import (Network, NetworkConfig, TrainReport, forward, forward_batch,
                  gradient_check, init_network, predict, train)
from .errors import DataError, DivergenceError, ModelFormatError
from .ingest import (ChannelId, CsvDialect, ParseDiagnostics, RawRecord,
                     parse_air_quality_csv, select_features, write_air_quality_csv)
from .kernels import backend_name
from .metrics import (ClassMetrics, ConfusionMatrix, CVReport, EvalReport,
                      confusion_matrix, evaluate, evaluate_network, per_class_metrics,
                      regression_errors, roc_auc, stratified_kfold_cv, summary_stats)
from .model_io import ModelBundle, load_model, save_model
from .preprocess import (LabeledExample, RiskLabel, RiskThresholds, ScalerParams,
                         ScoreRule, apply_scaler, build_examples, drop_incomplete,
                         fit_scaler, invert_scaler, label_risk, risk_score,
                         split_train_test)

__all__ = [name for name in dir() if not name.startswith("_")]
