import os
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))  # corpus.py, oracles.py

from airalarm import CsvDialect, parse_air_quality_csv

FIXTURE_CSV = Path(__file__).parent / "data" / "fixture_air.csv"


@pytest.fixture(scope="session")
def fixture_path() -> Path:
    return FIXTURE_CSV


@pytest.fixture(scope="session")
def fixture_records():
    with open(FIXTURE_CSV, encoding="utf-8") as stream:
        records, diag = parse_air_quality_csv(stream, CsvDialect())
    return records, diag


@pytest.fixture(scope="session")
def full_corpus(tmp_path_factory) -> Path:
    """The real dataset when AIRALARM_UCI_CSV points at it, else a generated
    full-size synthetic corpus in the same dialect."""
    override = os.environ.get("AIRALARM_UCI_CSV")
    if override:
        path = Path(override)
        if not path.exists():
            pytest.fail(f"AIRALARM_UCI_CSV={override} does not exist")
        return path
    from corpus import generate_air_quality_csv

    path = tmp_path_factory.mktemp("corpus") / "air_quality.csv"
    generate_air_quality_csv(path)
    return path


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(2024)
