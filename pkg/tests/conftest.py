from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent


@pytest.fixture(scope="session")
def scenes_dir() -> Path:
    return ROOT / "scenes"


@pytest.fixture(scope="session")
def scenario_file() -> Path:
    return ROOT / "scenarios" / "fig1_paths.json"


@pytest.fixture(scope="session")
def golden_dir() -> Path:
    return ROOT / "tests" / "golden"
