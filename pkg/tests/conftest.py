from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parent.parent
SCENARIO_DIR = REPO_ROOT / "scenarios"


@pytest.fixture
def scenario_dir() -> Path:
    return SCENARIO_DIR


@pytest.fixture
def air_scenario_path() -> Path:
    return SCENARIO_DIR / "air.scenario.json"


@pytest.fixture
def parking_scenario_path() -> Path:
    return SCENARIO_DIR / "parking.scenario.json"


@pytest.fixture
def demo_instance_path() -> Path:
    return SCENARIO_DIR / "virtual_demo.json"
