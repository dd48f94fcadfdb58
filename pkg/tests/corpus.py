"""Synthetic full-size air-quality corpus in the exact source dialect.

Used by the acceptance suite (and the benchmark) when the real file is not
available: hourly rows from March 2004 onward, `;` separators, decimal
commas, `-200` sentinels, the extra PT08 sensor columns, trailing empty
fields, and a couple of blank lines at the end of the file.

The generator drives everything from a latent pollution index that moves
between clean / moderate / episode regimes, so derived risk scores form
three well-populated classes with genuine transitions through the band
edges. Channel values are the index plus channel noise mapped into each
channel's realistic raw range; labels are left entirely to the pipeline.
"""

from __future__ import annotations

import argparse
import datetime as dt
from pathlib import Path

import numpy as np

# (low, high, decimals) per channel, spanning the public dataset's ranges.
CHANNEL_RANGES = [
    ("CO(GT)", 0.1, 11.9, 1),
    ("NMHC(GT)", 7.0, 1189.0, 0),
    ("C6H6(GT)", 0.1, 63.7, 1),
    ("NOx(GT)", 2.0, 1479.0, 0),
    ("NO2(GT)", 2.0, 340.0, 0),
    ("T", -1.9, 44.6, 1),
    ("RH", 9.2, 88.7, 1),
    ("AH", 0.1847, 2.231, 4),
]

MISSING_RATES = [0.03, 0.06, 0.02, 0.04, 0.04, 0.01, 0.01, 0.01]

HEADER = ("Date;Time;CO(GT);PT08.S1(CO);NMHC(GT);C6H6(GT);PT08.S2(NMHC);"
          "NOx(GT);PT08.S3(NOx);NO2(GT);PT08.S4(NO2);PT08.S5(O3);T;RH;AH;;")


def _pollution_index(n: int, rng: np.random.Generator) -> np.ndarray:
    levels = np.array([0.18, 0.45, 0.74])
    regime = np.empty(n, dtype=np.int64)
    r = 1
    for i in range(n):
        if rng.random() > 0.985:
            r = int(rng.integers(0, 3))
        regime[i] = r
    base = np.convolve(levels[regime], np.ones(7) / 7.0, mode="same")

    t = np.arange(n)
    hour = (18 + t) % 24
    day = t / 24.0
    seasonal = 0.05 * np.sin(2.0 * np.pi * (day - 80.0) / 365.0)
    diurnal = 0.04 * np.sin(2.0 * np.pi * (hour - 14.0) / 24.0)

    ar = np.empty(n)
    ar[0] = 0.0
    shocks = rng.normal(0.0, 0.008, size=n)
    for i in range(1, n):
        ar[i] = 0.95 * ar[i - 1] + shocks[i]

    return np.clip(base + seasonal + diurnal + ar, 0.02, 0.98)


def _format_number(value: float, decimals: int) -> str:
    if decimals == 0:
        return str(int(round(value)))
    return f"{value:.{decimals}f}".replace(".", ",")


def generate_air_quality_csv(path: str | Path, n_rows: int = 9357,
                             seed: int = 20040310) -> Path:
    rng = np.random.default_rng(seed)
    p = _pollution_index(n_rows, rng)

    channels = []
    for c, (_, lo, hi, _) in enumerate(CHANNEL_RANGES):
        v = np.clip(p + rng.normal(0.0, 0.06, size=n_rows), 0.0, 1.0)
        channels.append(lo + (hi - lo) * v)
    missing = [rng.random(n_rows) < rate for rate in MISSING_RATES]

    # PT08 sensor columns: affine in the index plus noise, integer-valued.
    pt08 = {
        "S1": 600.0 + 1400.0 * p + rng.normal(0, 60, n_rows),
        "S2": 380.0 + 1800.0 * p + rng.normal(0, 80, n_rows),
        "S3": 2600.0 - 2300.0 * p + rng.normal(0, 90, n_rows),
        "S4": 550.0 + 2200.0 * p + rng.normal(0, 80, n_rows),
        "S5": 220.0 + 2300.0 * p + rng.normal(0, 100, n_rows),
    }

    start = dt.datetime(2004, 3, 10, 18, 0, 0)
    lines = [HEADER]
    for i in range(n_rows):
        stamp = start + dt.timedelta(hours=i)
        cells = [stamp.strftime("%d/%m/%Y"), stamp.strftime("%H.%M.%S")]
        for c, (_, _, _, decimals) in enumerate(CHANNEL_RANGES):
            cells.append("-200" if missing[c][i]
                         else _format_number(channels[c][i], decimals))
        row = cells[:3]
        row.append(str(int(round(pt08["S1"][i]))))
        row.append(cells[3])  # NMHC(GT)
        row.append(cells[4])  # C6H6(GT)
        row.append(str(int(round(pt08["S2"][i]))))
        row.append(cells[5])  # NOx(GT)
        row.append(str(int(round(pt08["S3"][i]))))
        row.append(cells[6])  # NO2(GT)
        row.append(str(int(round(pt08["S4"][i]))))
        row.append(str(int(round(pt08["S5"][i]))))
        row.extend(cells[7:])  # T, RH, AH
        lines.append(";".join(row) + ";;")
    lines.append("")  # the source file ends with blank lines
    lines.append("")

    path = Path(path)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


if __name__ == "__main__":
    cli = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    cli.add_argument("out", help="path of the CSV file to write")
    cli.add_argument("--rows", type=int, default=9357)
    cli.add_argument("--seed", type=int, default=20040310)
    ns = cli.parse_args()
    out = generate_air_quality_csv(ns.out, ns.rows, ns.seed)
    print(f"wrote {out}")
