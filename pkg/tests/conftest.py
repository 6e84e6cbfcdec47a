from pathlib import Path

import pytest

from sarquad.missionconfig import MissionConfigFile

MISSIONS_DIR = Path(__file__).resolve().parent.parent / "missions"

@pytest.fixture
def missions_dir():
    return MISSIONS_DIR

@pytest.fixture
def hover_config():
    """
    The noise-free closed-loop config
    """
    return MissionConfigFile(MISSIONS_DIR / "hover.cfg").mission

@pytest.fixture
def default_config():
    return MissionConfigFile(MISSIONS_DIR / "default.cfg").mission

@pytest.fixture
def partial_config():
    return MissionConfigFile(MISSIONS_DIR / "partial.cfg").mission
