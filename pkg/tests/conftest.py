from pathlib import Path

import pytest

from app.core.config import settings

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(autouse=True)
def reports_dir(tmp_path, monkeypatch) -> Path:
    """Keep CLI reports out of the working tree."""
    out = tmp_path / "reports"
    monkeypatch.setattr(settings, "REPORTS_DIR", str(out))
    return out
