"""Command-line entry point wiring the full pipeline.

Subcommands: ingest, train, eval, cv, predict, stream. Results go to
standard output (or ``--out`` files), diagnostics and errors to the error
stream. Exit codes: 0 success, 1 usage error, 2 data/format error,
3 numeric divergence.

A JSON ``--config`` file may hold any of the subcommand's flags (keys are
the flag names with underscores); explicit flags always override it.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .alarm import (AlarmPolicy, frames_from_records, read_frames_jsonl, replay,
                    write_alert_log)
from .ann import NetworkConfig, init_network, predict, train
from .errors import DataError, DivergenceError
from .ingest import ChannelId, CsvDialect, parse_air_quality_csv
from .kernels import backend_name
from .metrics import evaluate_network, render_report_text, report_to_dict, stratified_kfold_cv
from .model_io import load_model, save_model
from .preprocess import (RiskLabel, RiskThresholds, ScoreRule, apply_scaler,
                         build_examples, drop_incomplete, fit_scaler, risk_score,
                         split_indices, split_train_test)


class _UsageError(Exception):
    def __init__(self, message: str, printed: bool = False):
        super().__init__(message)
        self.printed = printed


class _Parser(argparse.ArgumentParser):
    """argparse parser that reports usage problems with exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise _UsageError(message, printed=True)


def _fraction(text: str) -> float:
    value = float(text)
    if not (0.0 < value < 1.0):
        raise argparse.ArgumentTypeError(f"must be in (0,1), got {text}")
    return value


def _unit_interval(text: str) -> float:
    value = float(text)
    if not (0.0 < value < 1.0):
        raise argparse.ArgumentTypeError(f"must be strictly between 0 and 1, got {text}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return value


def _folds(text: str) -> int:
    value = int(text)
    if value < 2:
        raise argparse.ArgumentTypeError(f"must be >= 2, got {text}")
    return value


def _rate(text: str) -> float:
    value = float(text)
    if value < 0.0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return value


def _hidden_sizes(text: str) -> tuple[int, ...]:
    try:
        sizes = tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not sizes or any(s < 1 for s in sizes):
        raise argparse.ArgumentTypeError(f"hidden sizes must be positive, got {text!r}")
    return sizes


def _values8(text: str) -> np.ndarray:
    try:
        values = np.array([float(part) for part in text.split(",")])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if values.shape != (len(ChannelId),):
        raise argparse.ArgumentTypeError(
            f"expected {len(ChannelId)} values ({', '.join(c.name for c in ChannelId)})")
    if not np.isfinite(values).all():
        raise argparse.ArgumentTypeError("values must be finite")
    return values


def _add_dialect_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--delimiter", default=";", help="field separator (default ';')")
    sub.add_argument("--decimal", default=",", help="decimal mark (default ',')")
    sub.add_argument("--sentinel", type=float, default=-200.0,
                     help="missing-value sentinel (default -200)")
    sub.add_argument("--no-header", action="store_true",
                     help="input has no header line (columns in canonical order)")


def _add_labeling_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--score-rule", choices=["mean8", "mean5"], default="mean8",
                     help="risk score: mean of all 8 features or of the 5 pollutants")
    sub.add_argument("--low", type=_unit_interval, default=0.3,
                     help="upper edge of the low-risk band (default 0.3)")
    sub.add_argument("--high", type=_unit_interval, default=0.6,
                     help="lower edge of the high-risk band (default 0.6)")


def _add_network_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--hidden", type=_hidden_sizes, default=(5,),
                     help="comma-separated hidden layer sizes (default 5)")
    sub.add_argument("--learning-rate", type=_rate, default=0.1)
    sub.add_argument("--epochs", type=_positive_int, default=100)


def _add_common_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--seed", type=int, default=42, help="PRNG seed (default 42)")
    sub.add_argument("--report", choices=["text", "json", "both"], default="text")
    sub.add_argument("--config", default=None,
                     help="JSON file of flag defaults (explicit flags override)")


def build_parser() -> tuple[_Parser, dict[str, _Parser]]:
    parser = _Parser(prog="airalarm",
                     description="Air-quality risk classifier and alert replayer.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", metavar="command")
    subs: dict[str, _Parser] = {}

    def command(name: str, help_text: str, func) -> _Parser:
        sub = commands.add_parser(name, help=help_text)
        sub.set_defaults(func=func)
        subs[name] = sub
        return sub

    sub = command("ingest", "parse a dataset and report diagnostics", cmd_ingest)
    sub.add_argument("--data", required=True, help="path to the CSV file")
    _add_dialect_flags(sub)
    _add_common_flags(sub)

    sub = command("train", "train a model and write the model file", cmd_train)
    sub.add_argument("--data", required=True)
    sub.add_argument("--out", required=True, help="model file to write")
    sub.add_argument("--train-fraction", type=_fraction, default=0.7)
    sub.add_argument("--fit-on-train", action="store_true",
                     help="fit the scaler on the training split only (leakage-free)")
    _add_dialect_flags(sub)
    _add_labeling_flags(sub)
    _add_network_flags(sub)
    _add_common_flags(sub)

    sub = command("eval", "evaluate a model on a dataset", cmd_eval)
    sub.add_argument("--model", required=True)
    sub.add_argument("--data", required=True)
    _add_dialect_flags(sub)
    _add_common_flags(sub)

    sub = command("cv", "stratified k-fold cross-validation", cmd_cv)
    sub.add_argument("--data", required=True)
    sub.add_argument("--k", type=_folds, default=10, help="number of folds (default 10)")
    _add_dialect_flags(sub)
    _add_labeling_flags(sub)
    _add_network_flags(sub)
    _add_common_flags(sub)

    sub = command("predict", "classify one raw feature row", cmd_predict)
    sub.add_argument("--model", required=True)
    sub.add_argument("--values", type=_values8, required=True,
                     help="8 comma-separated raw channel values in canonical order")
    _add_common_flags(sub)

    sub = command("stream", "replay sensor frames and emit alert events", cmd_stream)
    sub.add_argument("--model", required=True)
    sub.add_argument("--data", required=True, help="frame stream (CSV or JSON lines)")
    sub.add_argument("--frames-format", choices=["auto", "csv", "jsonl"], default="auto")
    sub.add_argument("--debounce", type=_positive_int, default=1,
                     help="consecutive frames required before a level switch")
    sub.add_argument("--no-warn-medium", action="store_true",
                     help="suppress alerts on transitions into Medium")
    sub.add_argument("--trace", action="store_true",
                     help="also emit one JSON line per classified frame")
    sub.add_argument("--out", default=None, help="write JSON lines here instead of stdout")
    _add_dialect_flags(sub)
    _add_common_flags(sub)

    return parser, subs


def _apply_config_file(argv: list[str], subs: dict[str, _Parser]) -> None:
    """Pre-scan for --config and install its values as subparser defaults."""
    if not argv or argv[0] not in subs:
        return
    path = None
    for i, token in enumerate(argv):
        if token == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
        elif token.startswith("--config="):
            path = token.split("=", 1)[1]
    if path is None:
        return
    sub = subs[argv[0]]
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise _UsageError(f"cannot read config file {path}: {exc}")
    if not isinstance(doc, dict):
        raise _UsageError(f"config file {path} must hold a JSON object")

    actions = {action.dest: action for action in sub._actions}
    defaults = {}
    for key, value in doc.items():
        dest = key.replace("-", "_")
        action = actions.get(dest)
        if action is None or dest in ("help", "config", "func"):
            raise _UsageError(f"config file {path}: unknown key {key!r}")
        if action.type is not None:
            try:
                value = action.type(value if isinstance(value, str) else str(value))
            except (argparse.ArgumentTypeError, ValueError) as exc:
                raise _UsageError(f"config file {path}: bad value for {key!r}: {exc}")
        defaults[dest] = value
    sub.set_defaults(**defaults)


def _dialect(args) -> CsvDialect:
    return CsvDialect(delimiter=args.delimiter, decimal=args.decimal,
                      sentinel=args.sentinel, has_header=not args.no_header)


def _parse_file(path: str, dialect: CsvDialect):
    with open(path, "r", encoding="utf-8") as stream:
        return parse_air_quality_csv(stream, dialect)


def _labeling(args) -> tuple[RiskThresholds, ScoreRule]:
    try:
        thresholds = RiskThresholds(args.low, args.high)
    except ValueError as exc:
        raise _UsageError(str(exc))
    return thresholds, ScoreRule(args.score_rule)


def _net_config(args) -> NetworkConfig:
    sizes = (len(ChannelId),) + tuple(args.hidden) + (len(RiskLabel),)
    return NetworkConfig(layer_sizes=sizes, learning_rate=args.learning_rate,
                         epochs=args.epochs, seed=args.seed)


def _class_counts(examples) -> dict[str, int]:
    counts = {label.name.lower(): 0 for label in RiskLabel}
    for ex in examples:
        counts[ex.label.name.lower()] += 1
    return counts


def _emit(args, text: str, payload: dict) -> None:
    if args.report in ("text", "both"):
        sys.stdout.write(text)
    if args.report in ("json", "both"):
        sys.stdout.write(json.dumps(payload, indent=1) + "\n")


def cmd_ingest(args) -> int:
    records, diag = _parse_file(args.data, _dialect(args))
    complete = sum(1 for r in records if len(r.channels) == len(ChannelId))
    missing = {c.name.lower(): sum(1 for r in records if c not in r.channels)
               for c in ChannelId}
    text_lines = [
        f"rows read:     {diag.rows_read}",
        f"rows parsed:   {diag.rows_parsed}",
        f"rows rejected: {diag.rows_rejected}",
        f"complete rows: {complete}",
        "missing by channel: " + "  ".join(f"{k}={v}" for k, v in missing.items()),
    ]
    for line_no, reason in diag.rejection_reasons[:10]:
        text_lines.append(f"  rejected line {line_no}: {reason}")
    payload = {
        "rows_read": diag.rows_read, "rows_parsed": diag.rows_parsed,
        "rows_rejected": diag.rows_rejected, "complete_rows": complete,
        "missing_by_channel": missing,
        "rejections": [{"line": n, "reason": r} for n, r in diag.rejection_reasons],
    }
    _emit(args, "\n".join(text_lines) + "\n", payload)
    return 0


def _prepare_examples(args, records):
    rows = drop_incomplete(records)
    if not rows:
        raise DataError("no complete rows in the dataset")
    thresholds, rule = _labeling(args)
    return rows, thresholds, rule


def cmd_train(args) -> int:
    records, diag = _parse_file(args.data, _dialect(args))
    rows, thresholds, rule = _prepare_examples(args, records)

    if args.fit_on_train:
        train_idx, test_idx = split_indices(len(rows), args.train_fraction, args.seed)
        scaler = fit_scaler([rows[i] for i in train_idx])
        examples = build_examples(rows, scaler, thresholds, rule)
        train_set = [examples[i] for i in train_idx]
        test_set = [examples[i] for i in test_idx]
    else:
        scaler = fit_scaler(rows)
        examples = build_examples(rows, scaler, thresholds, rule)
        train_set, test_set = split_train_test(examples, args.train_fraction, args.seed)

    config = _net_config(args)
    stride = max(1, config.epochs // 10)

    def progress(epoch: int, loss: float) -> None:
        if epoch % stride == 0 or epoch == config.epochs:
            print(f"epoch {epoch}/{config.epochs}  mse={loss:.6f}", file=sys.stderr)

    net, report = train(init_network(config), train_set, config, on_epoch=progress)
    save_model(net, scaler, thresholds, rule, args.out, trained_epochs=report.epochs_run)

    test_eval = evaluate_network(net, test_set) if test_set else None
    text_lines = [
        f"rows parsed: {diag.rows_parsed} (rejected {diag.rows_rejected}), complete: {len(rows)}",
        "class counts: " + "  ".join(f"{k}={v}" for k, v in _class_counts(examples).items()),
        f"backend: {backend_name()}",
        f"epochs run: {report.epochs_run}, final epoch mse: {report.epoch_losses[-1]:.6f}",
        f"train accuracy: {report.final_train_accuracy:.4f} (n={len(train_set)})",
    ]
    if test_eval is not None:
        text_lines.append(f"test accuracy: {test_eval.accuracy:.4f} (n={len(test_set)})")
    text_lines.append(f"model written: {args.out}")
    payload = {
        "rows_parsed": diag.rows_parsed, "rows_rejected": diag.rows_rejected,
        "complete_rows": len(rows), "class_counts": _class_counts(examples),
        "backend": backend_name(),
        "epochs_run": report.epochs_run,
        "epoch_losses": report.epoch_losses,
        "train_accuracy": report.final_train_accuracy,
        "test_accuracy": None if test_eval is None else test_eval.accuracy,
        "model_path": str(args.out),
    }
    _emit(args, "\n".join(text_lines) + "\n", payload)
    return 0


def cmd_eval(args) -> int:
    bundle = load_model(args.model)
    records, _ = _parse_file(args.data, _dialect(args))
    rows = drop_incomplete(records)
    if not rows:
        raise DataError("no complete rows in the dataset")
    examples = build_examples(rows, bundle.scaler, bundle.thresholds, bundle.rule)
    report = evaluate_network(bundle.net, examples)
    _emit(args, render_report_text(report), report_to_dict(report))
    return 0


def cmd_cv(args) -> int:
    records, _ = _parse_file(args.data, _dialect(args))
    rows, thresholds, rule = _prepare_examples(args, records)
    scaler = fit_scaler(rows)
    examples = build_examples(rows, scaler, thresholds, rule)
    cv = stratified_kfold_cv(examples, args.k, args.seed, _net_config(args))
    for warning in cv.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    text = (f"{cv.k}-fold stratified cross-validation (n={len(examples)})\n"
            + "fold accuracies: " + " ".join(f"{a:.4f}" for a in cv.fold_accuracies)
            + "\n\n" + render_report_text(cv.report))
    payload = {"k": cv.k, "fold_accuracies": cv.fold_accuracies,
               "warnings": cv.warnings, "report": report_to_dict(cv.report)}
    _emit(args, text, payload)
    return 0


def cmd_predict(args) -> int:
    bundle = load_model(args.model)
    features = apply_scaler(bundle.scaler, args.values)
    scores, label = predict(bundle.net, features)
    derived = risk_score(features, bundle.rule)
    text = (f"label: {label.display_name}\n"
            + "scores: " + "  ".join(f"{l.name.lower()}={scores[int(l)]:.6f}"
                                     for l in RiskLabel)
            + f"\nderived risk score: {derived:.6f}\n")
    payload = {"label": label.name.lower(),
               "scores": {l.name.lower(): float(scores[int(l)]) for l in RiskLabel},
               "derived_risk_score": derived}
    _emit(args, text, payload)
    return 0


def cmd_stream(args) -> int:
    bundle = load_model(args.model)
    fmt = args.frames_format
    if fmt == "auto":
        fmt = "jsonl" if args.data.endswith((".jsonl", ".ndjson", ".json")) else "csv"
    if fmt == "jsonl":
        with open(args.data, "r", encoding="utf-8") as stream:
            frames, dropped = read_frames_jsonl(stream)
    else:
        records, _ = _parse_file(args.data, _dialect(args))
        frames, dropped = frames_from_records(records)
    if dropped:
        print(f"dropped {dropped} incomplete frame(s)", file=sys.stderr)

    policy = AlarmPolicy(debounce=args.debounce, warn_on_medium=not args.no_warn_medium)
    log = replay(frames, bundle, policy)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as out:
            write_alert_log(log, out, include_trace=args.trace)
    else:
        write_alert_log(log, sys.stdout, include_trace=args.trace)
    print(f"replayed {len(log.trace)} frame(s), emitted {len(log.events)} alert(s)",
          file=sys.stderr)
    return 0


def dispatch(argv=None) -> int:
    """Run one subcommand; returns the process exit code."""
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser, subs = build_parser()
    try:
        _apply_config_file(argv, subs)
        args = parser.parse_args(argv)
    except _UsageError as exc:
        if not exc.printed:
            print(f"airalarm: error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # argparse --help / --version
        return int(exc.code or 0)
    if getattr(args, "func", None) is None:
        parser.print_usage(sys.stderr)
        print("airalarm: error: a command is required", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except _UsageError as exc:
        if not exc.printed:
            print(f"airalarm: error: {exc}", file=sys.stderr)
        return 1
    except DivergenceError as exc:
        print(f"airalarm: numeric divergence: {exc}", file=sys.stderr)
        return 3
    except (DataError, OSError, ValueError) as exc:
        print(f"airalarm: error: {exc}", file=sys.stderr)
        return 2


def main(argv=None) -> None:
    sys.exit(dispatch(argv))


if __name__ == "__main__":
    main()
