from __future__ import annotations

import json
from pathlib import Path

import pytest

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def non_arithmetic_utterances() -> list[str]:
    return (DATA_DIR / "non_arithmetic.txt").read_text(encoding="utf-8").splitlines()


@pytest.fixture()
def rates_file(tmp_path: Path) -> Path:
    path = tmp_path / "rates.jsonl"
    lines = [
        json.dumps({"schema": "mrkl-rates", "version": 1, "timestamp": "2022-05-01T00:00:00Z"}),
        json.dumps({"pair": "USD/MAD", "rate": "10.0"}),
        json.dumps({"pair": "MAD/USD", "rate": "0.1"}),
        json.dumps({"pair": "USD/EUR", "rate": "0.93"}),
    ]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture()
def records_file(tmp_path: Path) -> Path:
    path = tmp_path / "records.jsonl"
    lines = [
        json.dumps({"schema": "mrkl-records", "version": 1, "store": "clients"}),
        json.dumps({"key": "acme", "record": {"name": "Acme Corp", "tier": "gold"}}),
        json.dumps({"key": "globex", "record": {"name": "Globex", "tier": "silver"}}),
    ]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
