"""Parsing for the UCI Air Quality CSV dialect.

The source file is ``;``-separated UTF-8 text with ``,`` as the decimal mark,
``-200`` as the missing-value sentinel, and one or more empty trailing fields
on every row. The first two fields are the date (``DD/MM/YYYY``) and time
(``HH.MM.SS``); the remaining columns are matched by header name, and only
the eight channels the risk model consumes are kept.

Parsing never aborts on a bad data row: malformed rows are counted and
logged in :class:`ParseDiagnostics` and the rest of the file is processed.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field
from enum import IntEnum
from typing import IO, Iterable, Optional

import numpy as np

from .errors import DataError


class ChannelId(IntEnum):
    """The eight input channels, in fixed column order."""

    CO = 0
    NMHC = 1
    C6H6 = 2
    NOX = 3
    NO2 = 4
    TEMP = 5
    RH = 6
    AH = 7


#: Header spellings (upper-cased) found in source files, mapped to channels.
HEADER_ALIASES: dict[str, ChannelId] = {
    "CO(GT)": ChannelId.CO,
    "CO": ChannelId.CO,
    "NMHC(GT)": ChannelId.NMHC,
    "NMHC": ChannelId.NMHC,
    "C6H6(GT)": ChannelId.C6H6,
    "C6H6": ChannelId.C6H6,
    "NOX(GT)": ChannelId.NOX,
    "NOX": ChannelId.NOX,
    "NO2(GT)": ChannelId.NO2,
    "NO2": ChannelId.NO2,
    "T": ChannelId.TEMP,
    "TEMP": ChannelId.TEMP,
    "RH": ChannelId.RH,
    "AH": ChannelId.AH,
}

#: Canonical header spellings used when writing records back out.
CANONICAL_HEADERS = (
    "CO(GT)", "NMHC(GT)", "C6H6(GT)", "NOx(GT)", "NO2(GT)", "T", "RH", "AH",
)


@dataclass(frozen=True)
class CsvDialect:
    """File-format knobs for the air-quality CSV family."""

    delimiter: str = ";"
    decimal: str = ","
    sentinel: float = -200.0
    has_header: bool = True


@dataclass(frozen=True)
class RawRecord:
    """One parsed data row.

    ``channels`` holds only the channels that were present; a missing
    channel is a missing key, never a stored sentinel or NaN.
    """

    date: dt.date
    time: dt.time
    channels: dict[ChannelId, float]

    @property
    def timestamp(self) -> dt.datetime:
        return dt.datetime.combine(self.date, self.time)


@dataclass
class ParseDiagnostics:
    rows_read: int = 0
    rows_parsed: int = 0
    rows_rejected: int = 0
    rejection_reasons: list[tuple[int, str]] = field(default_factory=list)

    def reject(self, line_no: int, reason: str) -> None:
        self.rows_rejected += 1
        self.rejection_reasons.append((line_no, reason))


def _parse_cell(text: str, dialect: CsvDialect) -> Optional[float]:
    """Parse one numeric cell. Returns None for missing (empty or sentinel).

    Raises ValueError for anything that is neither numeric, empty, nor the
    sentinel.
    """
    text = text.strip()
    if not text:
        return None
    if dialect.decimal != ".":
        if "." in text:
            raise ValueError(f"unexpected '.' in cell {text!r}")
        text = text.replace(dialect.decimal, ".")
    value = float(text)
    if value == dialect.sentinel:
        return None
    if not np.isfinite(value):
        raise ValueError(f"non-finite cell {text!r}")
    return value


def _map_header(tokens: list[str]) -> dict[int, ChannelId]:
    """Map column index -> channel for the data columns of a header row."""
    mapping: dict[int, ChannelId] = {}
    seen: set[ChannelId] = set()
    for idx, token in enumerate(tokens[2:], start=2):
        channel = HEADER_ALIASES.get(token.strip().upper())
        if channel is not None and channel not in seen:
            mapping[idx] = channel
            seen.add(channel)
    missing = [c.name for c in ChannelId if c not in seen]
    if missing:
        raise DataError(f"header does not name channel(s): {', '.join(missing)}")
    return mapping


def _strip_trailing_empty(cells: list[str]) -> list[str]:
    # The source file ends every row with empty ';;' fields; drop them.
    while cells and not cells[-1].strip():
        cells.pop()
    return cells


def parse_air_quality_csv(
    source: Iterable[str] | IO[str],
    dialect: CsvDialect = CsvDialect(),
) -> tuple[list[RawRecord], ParseDiagnostics]:
    """Parse a text stream in the configured dialect.

    Returns one :class:`RawRecord` per well-formed data row plus diagnostics
    satisfying ``rows_read == rows_parsed + rows_rejected``. Blank lines are
    rejected with reason ``"blank"``; rows with a non-numeric cell are
    rejected with a reason naming the offending cell. Line numbers in the
    diagnostics are physical 1-based positions in the stream.
    """
    records: list[RawRecord] = []
    diag = ParseDiagnostics()
    column_map: Optional[dict[int, ChannelId]] = None
    if not dialect.has_header:
        column_map = {2 + i: ChannelId(i) for i in range(len(ChannelId))}

    for line_no, line in enumerate(source, start=1):
        line = line.rstrip("\r\n")
        if dialect.has_header and line_no == 1:
            column_map = _map_header(_strip_trailing_empty(line.split(dialect.delimiter)))
            continue
        diag.rows_read += 1
        if not line.strip():
            diag.reject(line_no, "blank")
            continue
        cells = _strip_trailing_empty(line.split(dialect.delimiter))
        if len(cells) < 2:
            diag.reject(line_no, f"expected date and time fields, got {len(cells)} field(s)")
            continue
        try:
            date = dt.datetime.strptime(cells[0].strip(), "%d/%m/%Y").date()
            time = dt.datetime.strptime(cells[1].strip(), "%H.%M.%S").time()
        except ValueError:
            diag.reject(line_no, f"bad date/time {cells[0]!r} {cells[1]!r}")
            continue

        assert column_map is not None
        channels: dict[ChannelId, float] = {}
        bad_cell = None
        for idx, channel in column_map.items():
            cell = cells[idx] if idx < len(cells) else ""
            try:
                value = _parse_cell(cell, dialect)
            except ValueError:
                bad_cell = f"column {channel.name}: cell {cell.strip()!r} is not numeric"
                break
            if value is not None:
                channels[channel] = value
        if bad_cell is not None:
            diag.reject(line_no, bad_cell)
            continue

        records.append(RawRecord(date, time, channels))
        diag.rows_parsed += 1

    return records, diag


def _format_value(value: float, dialect: CsvDialect) -> str:
    text = repr(float(value))
    if dialect.decimal != ".":
        text = text.replace(".", dialect.decimal)
    return text


def format_record(record: RawRecord, dialect: CsvDialect = CsvDialect()) -> str:
    """Render one record as a data line; absent channels re-emit the sentinel."""
    sentinel = dialect.sentinel
    sentinel_text = str(int(sentinel)) if sentinel == int(sentinel) else _format_value(sentinel, dialect)
    cells = [record.date.strftime("%d/%m/%Y"), record.time.strftime("%H.%M.%S")]
    for channel in ChannelId:
        if channel in record.channels:
            cells.append(_format_value(record.channels[channel], dialect))
        else:
            cells.append(sentinel_text)
    return dialect.delimiter.join(cells)


def write_air_quality_csv(
    records: Iterable[RawRecord],
    stream: IO[str],
    dialect: CsvDialect = CsvDialect(),
) -> None:
    """Write records in the dialect, with the canonical 8-channel header."""
    if dialect.has_header:
        stream.write(dialect.delimiter.join(("Date", "Time") + CANONICAL_HEADERS) + "\n")
    for record in records:
        stream.write(format_record(record, dialect) + "\n")


def select_features(record: RawRecord) -> Optional[np.ndarray]:
    """Project a record down to the 8 raw values in channel order.

    Returns None when any channel is absent; columns outside the eight are
    already dropped at parse time.
    """
    if len(record.channels) != len(ChannelId):
        return None
    return np.array([record.channels[c] for c in ChannelId], dtype=np.float64)
