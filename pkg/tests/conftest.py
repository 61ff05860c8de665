import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from teleopsim.kinematics import load_default_model, default_model_text


@pytest.fixture(scope="session")
def model():
    return load_default_model()


@pytest.fixture(scope="session")
def model_text():
    return default_model_text()
