from pathlib import Path

import pytest

GOLDEN_DIR = Path(__file__).parent / "golden"


@pytest.fixture
def golden():
    def load(name: str) -> str:
        return (GOLDEN_DIR / name).read_text(encoding="utf-8")

    return load
