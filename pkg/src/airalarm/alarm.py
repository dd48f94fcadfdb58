"""Offline alert replay: classify sensor frames and emit debounced events.

A frame's raw values are scaled with the bundle's scaler (clamped to the
training range), pushed through the network, and the argmax class becomes
the frame's level. The alarm state machine switches its current level only
after ``debounce`` consecutive frames agree on a new one, and emits an
event on the transition: always for High, for Medium only when the policy
says so, never for Low.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import IO, Iterable, Optional, Sequence

import numpy as np

from .ann import predict
from .ingest import ChannelId, RawRecord
from .model_io import ModelBundle
from .preprocess import RiskLabel, apply_scaler

_MESSAGES = {
    RiskLabel.HIGH: "high pollution risk: leave the area",
    RiskLabel.MEDIUM: "medium pollution risk: caution advised",
}


@dataclass(frozen=True)
class SensorFrame:
    timestamp: object  # any totally ordered key (datetime, number, ISO string)
    raw: np.ndarray  # the 8 raw-unit channel values

    def __post_init__(self) -> None:
        raw = np.asarray(self.raw, dtype=np.float64)
        object.__setattr__(self, "raw", raw)
        if raw.shape != (len(ChannelId),):
            raise ValueError(f"frame needs {len(ChannelId)} values, got shape {raw.shape}")
        if not np.isfinite(raw).all():
            raise ValueError("frame values must be finite")


@dataclass(frozen=True)
class AlarmPolicy:
    debounce: int = 1
    warn_on_medium: bool = True

    def __post_init__(self) -> None:
        if self.debounce < 1:
            raise ValueError("debounce must be >= 1")


@dataclass(frozen=True)
class AlertEvent:
    timestamp: object
    level: RiskLabel
    score: float
    message: str


@dataclass(frozen=True)
class AlarmState:
    current_level: RiskLabel = RiskLabel.LOW
    pending_level: RiskLabel = RiskLabel.LOW
    pending_run: int = 0


@dataclass(frozen=True)
class FrameTrace:
    timestamp: object
    label: RiskLabel
    score: float
    outputs: np.ndarray
    event: Optional[AlertEvent] = None


@dataclass
class AlertLog:
    events: list[AlertEvent] = field(default_factory=list)
    trace: list[FrameTrace] = field(default_factory=list)
    final_state: AlarmState = AlarmState()


def classify_frame(
    bundle: ModelBundle, frame: SensorFrame
) -> tuple[float, RiskLabel, np.ndarray]:
    """(score, label, output activations) for one frame.

    The score is the network's activation for the chosen class, so it reads
    as the model's confidence in the reported level.
    """
    features = apply_scaler(bundle.scaler, frame.raw)
    outputs, label = predict(bundle.net, features)
    return float(outputs[int(label)]), label, outputs


def alarm_step(
    state: AlarmState,
    classified: tuple[RiskLabel, float, object],
    policy: AlarmPolicy,
) -> tuple[AlarmState, Optional[AlertEvent]]:
    """Advance the debounce state machine by one classified frame."""
    label, score, timestamp = classified
    if label == state.current_level:
        return AlarmState(state.current_level, state.current_level, 0), None
    run = state.pending_run + 1 if label == state.pending_level else 1
    if run < policy.debounce:
        return AlarmState(state.current_level, label, run), None
    event = None
    if label == RiskLabel.HIGH or (label == RiskLabel.MEDIUM and policy.warn_on_medium):
        event = AlertEvent(timestamp, label, score, _MESSAGES[label])
    return AlarmState(label, label, 0), event


def replay(
    frames: Sequence[SensorFrame],
    bundle: ModelBundle,
    policy: AlarmPolicy = AlarmPolicy(),
    initial_state: AlarmState = AlarmState(),
) -> AlertLog:
    """Fold the alarm over an ordered frame stream.

    Frames must be sorted by timestamp (ties allowed). ``initial_state``
    lets a caller carry state across consecutive chunks; chunked replay is
    then identical to replaying the whole stream at once.
    """
    for prev, frame in zip(frames, frames[1:]):
        if frame.timestamp < prev.timestamp:
            raise ValueError(f"frames not sorted by timestamp: {frame.timestamp!r} "
                             f"arrives after {prev.timestamp!r}")
    log = AlertLog(final_state=initial_state)
    state = initial_state
    for frame in frames:
        score, label, outputs = classify_frame(bundle, frame)
        state, event = alarm_step(state, (label, score, frame.timestamp), policy)
        if event is not None:
            log.events.append(event)
        log.trace.append(FrameTrace(frame.timestamp, label, score, outputs, event))
    log.final_state = state
    return log


def frames_from_records(records: Iterable[RawRecord]) -> tuple[list[SensorFrame], int]:
    """Frames from parsed CSV records; incomplete rows are dropped, not imputed."""
    frames: list[SensorFrame] = []
    dropped = 0
    for record in records:
        if len(record.channels) != len(ChannelId):
            dropped += 1
            continue
        raw = np.array([record.channels[c] for c in ChannelId], dtype=np.float64)
        frames.append(SensorFrame(record.timestamp, raw))
    return frames, dropped


def read_frames_jsonl(stream: IO[str]) -> tuple[list[SensorFrame], int]:
    """Frames from JSON lines with `timestamp` plus the 8 named channels.

    Lines missing a channel (or carrying a non-finite value) are dropped and
    counted, mirroring the CSV path's incomplete-row rule.
    """
    frames: list[SensorFrame] = []
    dropped = 0
    for line in stream:
        line = line.strip()
        if not line:
            continue
        try:
            doc = json.loads(line)
            timestamp = doc["timestamp"]
            raw = np.array([float(doc[c.name.lower()]) for c in ChannelId])
            frames.append(SensorFrame(timestamp, raw))
        except (KeyError, TypeError, ValueError):
            dropped += 1
    return frames, dropped


def event_to_dict(event: AlertEvent) -> dict:
    return {
        "kind": "alert",
        "timestamp": _json_timestamp(event.timestamp),
        "level": event.level.name.lower(),
        "score": event.score,
        "message": event.message,
    }


def trace_to_dict(entry: FrameTrace) -> dict:
    return {
        "kind": "frame",
        "timestamp": _json_timestamp(entry.timestamp),
        "label": entry.label.name.lower(),
        "score": entry.score,
        "outputs": [float(v) for v in entry.outputs],
    }


def _json_timestamp(value: object) -> object:
    return value if isinstance(value, (str, int, float)) else str(value)


def write_alert_log(log: AlertLog, stream: IO[str], include_trace: bool = False) -> None:
    """JSON-lines dump: one alert per line, frame lines interleaved on request."""
    for entry in log.trace:
        if include_trace:
            stream.write(json.dumps(trace_to_dict(entry)) + "\n")
        if entry.event is not None:
            stream.write(json.dumps(event_to_dict(entry.event)) + "\n")
